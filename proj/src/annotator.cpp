#include "orientkit/annotator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"
#include "orientkit/parallel.hpp"

namespace orientkit {

namespace {

double weighted_circular_mean(const std::vector<std::pair<double, double>>& angle_weight) {
    double s = 0.0, c = 0.0;
    for (const auto& [a, w] : angle_weight) {
        s += w * std::sin(deg_to_rad(a));
        c += w * std::cos(deg_to_rad(a));
    }
    return wrap_deg(rad_to_deg(std::atan2(s, c)));
}

double record_weight(const PseudoLabelRecord& r, const AnnotatorConfig& config) {
    return config.use_confidence_weights ? r.confidence : 1.0;
}

}  // namespace

void validate(const PseudoLabelRecord& record) {
    if (record.asset_id.empty()) throw ValidationError("asset_id must not be empty");
    if (!std::isfinite(record.camera_azimuth_deg) || record.camera_azimuth_deg < 0.0 ||
        record.camera_azimuth_deg >= 360.0) {
        throw ValidationError("camera_azimuth_deg must be in [0, 360)");
    }
    validate(record.predicted);
    if (!std::isfinite(record.confidence) || record.confidence < 0.0 || record.confidence > 1.0) {
        throw ValidationError("confidence must be in [0, 1]");
    }
}

void validate(const AnnotatorConfig& config) {
    if (!std::isfinite(config.smoothing_sigma_deg) || config.smoothing_sigma_deg < 0.0) {
        throw ValidationError("smoothing_sigma_deg must be >= 0");
    }
    if (config.min_views < 1) throw ValidationError("min_views must be >= 1");
    validate(config.fit);
}

std::string_view to_string(AnnotationStatus s) noexcept {
    switch (s) {
        case AnnotationStatus::automatic: return "auto";
        case AnnotationStatus::needs_review: return "needs_review";
        case AnnotationStatus::human_overridden: return "human_overridden";
        case AnnotationStatus::discarded: return "discarded";
    }
    return "auto";
}

AnnotationStatus parse_status(std::string_view s) {
    if (s == "auto") return AnnotationStatus::automatic;
    if (s == "needs_review") return AnnotationStatus::needs_review;
    if (s == "human_overridden") return AnnotationStatus::human_overridden;
    if (s == "discarded") return AnnotationStatus::discarded;
    throw ValidationError("unknown annotation status: " + std::string(s));
}

double project_to_canonical(const PseudoLabelRecord& record) {
    return wrap_deg(record.predicted.azimuth_deg + record.camera_azimuth_deg);
}

std::vector<double> smooth_circular(std::span<const double> mass, double sigma_deg) {
    std::vector<double> out(mass.begin(), mass.end());
    if (sigma_deg <= 0.0 || mass.empty()) return out;
    const auto n = static_cast<long>(mass.size());
    const long radius = std::min<long>(static_cast<long>(std::ceil(4.0 * sigma_deg)), n / 2);
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double ksum = 0.0;
    for (long d = -radius; d <= radius; ++d) {
        const double w = std::exp(-0.5 * (d * d) / (sigma_deg * sigma_deg));
        kernel[static_cast<std::size_t>(d + radius)] = w;
        ksum += w;
    }
    for (double& w : kernel) w /= ksum;
    std::fill(out.begin(), out.end(), 0.0);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long d = -radius; d <= radius; ++d) {
            acc += kernel[static_cast<std::size_t>(d + radius)] *
                   mass[static_cast<std::size_t>(((i - d) % n + n) % n)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

DiscreteCircularDistribution build_histogram(std::span<const PseudoLabelRecord> records,
                                             const AnnotatorConfig& config) {
    validate(config);
    if (records.size() < static_cast<std::size_t>(config.min_views)) {
        throw InsufficientDataError("asset has " + std::to_string(records.size()) + " views, needs " +
                                    std::to_string(config.min_views));
    }
    // Deposit in a canonical order so the floating-point sums do not depend on
    // record order.
    std::vector<std::pair<int, double>> deposits;
    deposits.reserve(records.size());
    for (const auto& r : records) {
        validate(r);
        const int bin = static_cast<int>(std::lround(project_to_canonical(r))) % 360;
        deposits.emplace_back(bin, record_weight(r, config));
    }
    std::sort(deposits.begin(), deposits.end());
    double top = 0.0;
    for (const auto& d : deposits) top = std::max(top, d.second);
    if (!(top > 0.0)) throw InsufficientDataError("total pseudo-label weight is zero");
    // Relative weights: equal confidences give exactly the unweighted masses.
    std::vector<double> mass(360, 0.0);
    for (const auto& [bin, w] : deposits) mass[static_cast<std::size_t>(bin)] += w / top;
    return DiscreteCircularDistribution::from_mass(smooth_circular(mass, config.smoothing_sigma_deg), 360);
}

AssetAnnotation annotate_asset(std::span<const PseudoLabelRecord> records, const AnnotatorConfig& config) {
    if (records.empty()) throw InsufficientDataError("no pseudo-labels for asset");
    const std::string& asset_id = records.front().asset_id;
    const std::string& category = records.front().category;
    for (const auto& r : records) {
        if (r.asset_id != asset_id) throw ValidationError("records mix asset ids: " + asset_id + ", " + r.asset_id);
        if (r.category != category) throw ValidationError("asset " + asset_id + " has records in several categories");
    }

    const DiscreteCircularDistribution hist = build_histogram(records, config);
    const FitResult fit = fit_periodic(hist, config.fit);

    AssetAnnotation out;
    out.asset_id = asset_id;
    out.category = category;
    out.n_views = static_cast<int>(records.size());
    out.residual = fit.sse;
    const int alpha = map_symmetry_class(fit.params.alpha);
    out.params.alpha = alpha;
    out.params.sigma = fit.params.sigma;
    out.params.phi_deg = alpha >= 1 ? canonicalize_phase(fit.params.phi_deg, alpha) : 0.0;

    std::vector<std::pair<double, double>> polar, inplane;
    for (const auto& r : records) {
        const double w = record_weight(r, config);
        polar.emplace_back(r.predicted.polar_deg, w);
        inplane.emplace_back(r.predicted.inplane_deg, w);
    }
    std::sort(polar.begin(), polar.end());
    std::sort(inplane.begin(), inplane.end());
    out.polar_deg = std::min(weighted_circular_mean(polar), std::nextafter(180.0, 0.0));
    out.inplane_deg = weighted_circular_mean(inplane);
    return out;
}

std::vector<AssetAnnotation> annotate_corpus(std::span<const PseudoLabelRecord> records,
                                             const AnnotatorConfig& config, std::size_t workers) {
    validate(config);
    std::map<std::string, std::vector<PseudoLabelRecord>> by_asset;
    for (const auto& r : records) by_asset[r.asset_id].push_back(r);

    std::vector<const std::vector<PseudoLabelRecord>*> groups;
    groups.reserve(by_asset.size());
    for (const auto& [id, recs] : by_asset) groups.push_back(&recs);

    std::vector<AssetAnnotation> out(groups.size());
    parallel_for(groups.size(), workers, [&](std::size_t i) {
        const auto& recs = *groups[i];
        try {
            out[i] = annotate_asset(recs, config);
        } catch (const InsufficientDataError& e) {
            AssetAnnotation a;
            a.asset_id = recs.front().asset_id;
            a.category = recs.front().category;
            a.params = {0.0, 0, kSigmaMax};
            a.n_views = static_cast<int>(recs.size());
            a.status = AnnotationStatus::discarded;
            a.reason = e.what();
            out[i] = std::move(a);
        }
    });
    return out;
}

}  // namespace orientkit
