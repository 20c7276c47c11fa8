#include "orientkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"

namespace orientkit {

namespace {

double scored_error(double azimuth, const OrientationTriplet& pred, const OrientationTriplet& gt) {
    const OrientationTriplet eval{wrap_deg(azimuth), pred.polar_deg, pred.inplane_deg};
    return angular_error_3d(triplet_to_direction(eval), triplet_to_direction(gt));
}

void fill_accuracies(EvalReport& report, const std::vector<double>& errors) {
    report.n = errors.size();
    report.median_deg = median_error(errors);
    report.acc30 = acc_at(errors, 30.0);
    report.acc15 = acc_at(errors, 15.0);
}

}  // namespace

std::string_view to_string(CandidateMode m) noexcept {
    return m == CandidateMode::camera_facing ? "camera_facing" : "min_error";
}

CandidateMode parse_candidate_mode(std::string_view s) {
    if (s == "camera_facing") return CandidateMode::camera_facing;
    if (s == "min_error") return CandidateMode::min_error;
    throw ValidationError("unknown candidate mode: " + std::string(s));
}

double median_error(std::span<const double> errors) {
    if (errors.empty()) throw ValidationError("median of an empty error list");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted[(sorted.size() - 1) / 2];
}

double acc_at(std::span<const double> errors, double threshold_deg) {
    if (errors.empty()) throw ValidationError("accuracy of an empty error list");
    if (!(threshold_deg > 0.0)) throw ValidationError("accuracy threshold must be > 0");
    const auto hits = std::count_if(errors.begin(), errors.end(), [&](double e) { return e < threshold_deg; });
    return static_cast<double>(hits) / static_cast<double>(errors.size());
}

int azimuth_to_8bin(double azimuth_deg) {
    if (!std::isfinite(azimuth_deg) || azimuth_deg < 0.0 || azimuth_deg >= 360.0) {
        throw ValidationError("azimuth must be in [0, 360)");
    }
    return static_cast<int>(std::floor(azimuth_deg / 45.0 + 0.5)) % 8;
}

EvalReport evaluate_orientation(std::span<const OrientationEvalSample> samples, CandidateMode mode) {
    if (samples.empty()) throw ValidationError("no orientation samples to evaluate");
    EvalReport report;
    std::vector<double> errors;
    errors.reserve(samples.size());
    std::size_t bin_hits = 0, sym_total = 0, sym_hits = 0;

    for (const auto& s : samples) {
        validate(s.ground_truth);
        const auto& pred = s.predicted;
        if (!is_symmetry_class(pred.alpha_hat)) throw ValidationError("sample " + s.sample_id + ": bad alpha_hat");
        if (static_cast<int>(pred.candidates.size()) != pred.alpha_hat) {
            throw ValidationError("sample " + s.sample_id + ": candidate count differs from alpha_hat");
        }
        const bool gt_has_front = !(s.gt_alpha && *s.gt_alpha == 0);
        const OrientationTriplet pred_t{0.0, pred.polar_deg, pred.inplane_deg};

        SampleResult r;
        r.sample_id = s.sample_id;
        r.degenerate = is_gimbal_degenerate(s.ground_truth);
        if (pred.alpha_hat == 0) {
            r.error_deg = gt_has_front ? 180.0 : 0.0;
            r.bin_hit = !gt_has_front;
        } else if (!gt_has_front) {
            r.error_deg = 180.0;
            r.bin_hit = false;
        } else {
            double chosen = 0.0;
            if (mode == CandidateMode::camera_facing) {
                chosen = select_camera_facing(pred.candidates);
            } else {
                double best = std::numeric_limits<double>::infinity();
                for (double c : pred.candidates) {
                    const double e = scored_error(c, pred_t, s.ground_truth);
                    if (e < best || (e == best && c < chosen)) {
                        best = e;
                        chosen = c;
                    }
                }
            }
            r.evaluated_azimuth_deg = wrap_deg(chosen);
            r.error_deg = scored_error(chosen, pred_t, s.ground_truth);
            r.bin_hit = azimuth_to_8bin(*r.evaluated_azimuth_deg) == azimuth_to_8bin(s.ground_truth.azimuth_deg);
        }
        r.error_deg = quantize_angle(r.error_deg);
        if (s.gt_alpha) {
            r.symmetry_hit = pred.alpha_hat == *s.gt_alpha;
            ++sym_total;
            if (*r.symmetry_hit) ++sym_hits;
        }
        if (*r.bin_hit) ++bin_hits;
        errors.push_back(r.error_deg);
        report.per_sample.push_back(std::move(r));
    }
    fill_accuracies(report, errors);
    report.acc_8bin = static_cast<double>(bin_hits) / static_cast<double>(samples.size());
    if (sym_total > 0) report.symmetry_acc = static_cast<double>(sym_hits) / static_cast<double>(sym_total);
    return report;
}

EvalReport evaluate_relative_rotation(std::span<const RotationEvalSample> samples) {
    if (samples.empty()) throw ValidationError("no rotation samples to evaluate");
    EvalReport report;
    std::vector<double> errors;
    errors.reserve(samples.size());
    for (const auto& s : samples) {
        SampleResult r;
        r.sample_id = s.sample_id;
        r.error_deg = quantize_angle(geodesic_so3(s.predicted_relative, s.ground_truth_relative));
        errors.push_back(r.error_deg);
        report.per_sample.push_back(std::move(r));
    }
    fill_accuracies(report, errors);
    return report;
}

}  // namespace orientkit
