#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orientkit/periodic_fit.hpp"
#include "orientkit/rotation.hpp"

namespace orientkit {

struct OrientationEvalSample {
    std::string sample_id;
    DecodedOrientation predicted;
    OrientationTriplet ground_truth;
    std::optional<int> gt_alpha;
};

struct RotationEvalSample {
    std::string sample_id;
    RotationMatrix predicted_relative;
    RotationMatrix ground_truth_relative;
};

enum class CandidateMode { camera_facing, min_error };

std::string_view to_string(CandidateMode m) noexcept;
CandidateMode parse_candidate_mode(std::string_view s);

struct SampleResult {
    std::string sample_id;
    double error_deg = 0.0;
    /// Azimuth actually scored; empty when the prediction has no front face.
    std::optional<double> evaluated_azimuth_deg;
    std::optional<bool> bin_hit;
    std::optional<bool> symmetry_hit;
    bool degenerate = false;
};

struct EvalReport {
    std::size_t n = 0;
    double median_deg = 0.0;
    double acc30 = 0.0;
    double acc15 = 0.0;
    std::optional<double> acc_8bin;
    std::optional<double> symmetry_acc;
    std::vector<SampleResult> per_sample;
};

/// Lower median: element (n-1)/2 of the sorted errors.
double median_error(std::span<const double> errors);

/// Fraction of errors strictly below the threshold.
double acc_at(std::span<const double> errors, double threshold_deg);

/// round(azimuth / 45) mod 8 with halves rounded up.
int azimuth_to_8bin(double azimuth_deg);

/// Absolute-orientation metrics. Multi-face predictions are scored at the
/// candidate picked by `mode`. A prediction without a front face scores 180
/// against a ground truth that has one; when neither has one the error is 0.
/// Per-sample errors are rounded to 1e-6 degrees before aggregation.
EvalReport evaluate_orientation(std::span<const OrientationEvalSample> samples,
                                CandidateMode mode = CandidateMode::camera_facing);

/// Relative-rotation metrics from SO(3) geodesic errors.
EvalReport evaluate_relative_rotation(std::span<const RotationEvalSample> samples);

}  // namespace orientkit
