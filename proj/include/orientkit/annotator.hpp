#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orientkit/circular_dist.hpp"
#include "orientkit/periodic_fit.hpp"
#include "orientkit/rotation.hpp"

namespace orientkit {

/// One model prediction for one rendering of an asset.
struct PseudoLabelRecord {
    std::string asset_id;
    std::string category;
    std::string view_id;
    /// Azimuth of the rendering camera in the asset's canonical frame.
    double camera_azimuth_deg = 0.0;
    /// Prediction in the camera frame of this view.
    OrientationTriplet predicted;
    double confidence = 1.0;

    friend bool operator==(const PseudoLabelRecord&, const PseudoLabelRecord&) = default;
};

void validate(const PseudoLabelRecord& record);

struct AnnotatorConfig {
    double smoothing_sigma_deg = 3.0;
    bool use_confidence_weights = true;
    int min_views = 8;
    FitConfig fit;
};

void validate(const AnnotatorConfig& config);

enum class AnnotationStatus { automatic, needs_review, human_overridden, discarded };

std::string_view to_string(AnnotationStatus s) noexcept;
AnnotationStatus parse_status(std::string_view s);

struct AssetAnnotation {
    std::string asset_id;
    std::string category;
    /// phi canonicalized to [0, 360/alpha); alpha in {0, 1, 2, 4}.
    PeriodicVonMisesParams params;
    double residual = 0.0;
    int n_views = 0;
    AnnotationStatus status = AnnotationStatus::automatic;
    std::optional<std::string> reason;
    /// Weighted circular means of the per-view polar and in-plane predictions.
    std::optional<double> polar_deg;
    std::optional<double> inplane_deg;

    friend bool operator==(const AssetAnnotation&, const AssetAnnotation&) = default;
};

/// Azimuth of the prediction in the canonical frame: predicted + camera, mod 360.
double project_to_canonical(const PseudoLabelRecord& record);

/// Circular Gaussian smoothing of a 360-bin mass; sigma 0 is the identity.
std::vector<double> smooth_circular(std::span<const double> mass, double sigma_deg);

/// Normalized histogram of projected azimuths (the pseudo-label distribution).
/// Throws InsufficientDataError with fewer than `min_views` records or zero total weight.
DiscreteCircularDistribution build_histogram(std::span<const PseudoLabelRecord> records,
                                             const AnnotatorConfig& config = {});

/// Histogram, periodic fit, phase canonicalization and symmetry-class mapping
/// for one asset.
AssetAnnotation annotate_asset(std::span<const PseudoLabelRecord> records,
                               const AnnotatorConfig& config = {});

/// Annotates every asset found in `records` on `workers` threads. Assets below
/// min_views are emitted as discarded with a reason. Output is sorted by asset_id.
std::vector<AssetAnnotation> annotate_corpus(std::span<const PseudoLabelRecord> records,
                                             const AnnotatorConfig& config, std::size_t workers = 1);

}  // namespace orientkit
