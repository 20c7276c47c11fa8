#include "orientkit/circular_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "orientkit/angles.hpp"
#include "orientkit/bessel.hpp"
#include "orientkit/errors.hpp"

namespace orientkit {

namespace {

void check_period(int period_deg) {
    if (period_deg != 180 && period_deg != 360) {
        throw ValidationError("circular distribution period must be 180 or 360, got " +
                              std::to_string(period_deg));
    }
}

}  // namespace

DiscreteCircularDistribution::DiscreteCircularDistribution(std::vector<double> bins, int period)
    : bins_(std::move(bins)), period_(period) {}

DiscreteCircularDistribution DiscreteCircularDistribution::from_mass(std::span<const double> raw,
                                                                     int period_deg) {
    check_period(period_deg);
    if (raw.size() != static_cast<std::size_t>(period_deg)) {
        throw ValidationError("expected " + std::to_string(period_deg) + " bins, got " +
                              std::to_string(raw.size()));
    }
    return {normalize(raw), period_deg};
}

DiscreteCircularDistribution DiscreteCircularDistribution::from_normalized(std::vector<double> bins,
                                                                           int period_deg) {
    check_period(period_deg);
    if (bins.size() != static_cast<std::size_t>(period_deg)) {
        throw ValidationError("expected " + std::to_string(period_deg) + " bins, got " +
                              std::to_string(bins.size()));
    }
    double total = 0.0;
    for (double b : bins) {
        if (!std::isfinite(b) || b < 0.0) throw ValidationError("bins must be finite and >= 0");
        total += b;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError("distribution is not normalized (sum = " + std::to_string(total) + ")");
    }
    return {std::move(bins), period_deg};
}

DiscreteCircularDistribution DiscreteCircularDistribution::uniform(int period_deg) {
    check_period(period_deg);
    return {std::vector<double>(static_cast<std::size_t>(period_deg), 1.0 / period_deg), period_deg};
}

std::size_t DiscreteCircularDistribution::argmax() const noexcept {
    return static_cast<std::size_t>(std::distance(bins_.begin(),
                                                  std::max_element(bins_.begin(), bins_.end())));
}

double DiscreteCircularDistribution::max_value() const noexcept { return bins_[argmax()]; }

DiscreteCircularDistribution DiscreteCircularDistribution::shifted(int k) const {
    const auto n = static_cast<long>(bins_.size());
    std::vector<double> out(bins_.size());
    for (long i = 0; i < n; ++i) {
        long j = ((i + k) % n + n) % n;
        out[static_cast<std::size_t>(j)] = bins_[static_cast<std::size_t>(i)];
    }
    return {std::move(out), period_};
}

void validate(const PeriodicVonMisesParams& params, int alpha_max) {
    if (!std::isfinite(params.phi_deg) || params.phi_deg < 0.0 || params.phi_deg >= 360.0) {
        throw ValidationError("phi_deg must be in [0, 360), got " + std::to_string(params.phi_deg));
    }
    if (params.alpha < 0 || params.alpha > alpha_max) {
        throw ValidationError("alpha must be in [0, " + std::to_string(alpha_max) + "], got " +
                              std::to_string(params.alpha));
    }
    if (!std::isfinite(params.sigma) || params.sigma <= 0.0) {
        throw ValidationError("sigma must be > 0, got " + std::to_string(params.sigma));
    }
}

std::vector<double> normalize(std::span<const double> raw) {
    double total = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("mass entries must be finite and >= 0");
        total += v;
    }
    if (!(total > 0.0)) throw ValidationError("cannot normalize an all-zero mass");
    std::vector<double> out(raw.begin(), raw.end());
    for (double& v : out) v /= total;
    return out;
}

double clamp_sigma(double sigma) noexcept { return std::clamp(sigma, kSigmaMin, kSigmaMax); }

double periodic_weight(double delta_deg, int alpha, double sigma) {
    const double s = clamp_sigma(sigma);
    return std::exp((std::cos(alpha * deg_to_rad(delta_deg)) - 1.0) / (s * s));
}

double periodic_density(double delta_deg, int alpha, double sigma) {
    const double s = clamp_sigma(sigma);
    const double kappa = 1.0 / (s * s);
    // exp(k cos d) / I0(k) == exp(k (cos d - 1)) / (exp(-k) I0(k))
    return periodic_weight(delta_deg, alpha, s) / (2.0 * kPi * bessel_i0_scaled(kappa));
}

double polar_weight(double delta_deg, double sigma) {
    const double s = clamp_sigma(sigma);
    const double d = deg_to_rad(delta_deg);
    return std::exp(-0.5 * d * d / (s * s));
}

namespace {

// Exponentiates log-weights relative to their maximum so that very small sigma
// never underflows every bin to zero.
std::vector<double> exp_shifted(std::vector<double> log_w) {
    const double top = *std::max_element(log_w.begin(), log_w.end());
    for (double& v : log_w) v = std::exp(v - top);
    return log_w;
}

}  // namespace

DiscreteCircularDistribution make_periodic_target(const PeriodicVonMisesParams& params, int n_bins) {
    validate(params);
    if (n_bins != 360) throw ValidationError("periodic targets are defined on 360 bins");
    if (params.alpha == 0) return DiscreteCircularDistribution::uniform(360);
    // The 2 pi I0(1/s^2) factor of the density is constant over bins and
    // cancels in the renormalization.
    const double s = clamp_sigma(params.sigma);
    std::vector<double> log_w(360);
    for (int i = 0; i < 360; ++i) {
        log_w[static_cast<std::size_t>(i)] =
            (std::cos(params.alpha * deg_to_rad(i - params.phi_deg)) - 1.0) / (s * s);
    }
    return DiscreteCircularDistribution::from_mass(exp_shifted(std::move(log_w)), 360);
}

DiscreteCircularDistribution make_unimodal_target(double mu_deg, const TargetConfig& config) {
    if (!std::isfinite(config.sigma) || config.sigma <= 0.0) {
        throw ValidationError("target sigma must be > 0");
    }
    if (config.n_bins == 360) {
        if (!std::isfinite(mu_deg) || mu_deg < 0.0 || mu_deg >= 360.0) {
            throw ValidationError("mu must be in [0, 360) for a 360-bin target");
        }
        return make_periodic_target({mu_deg, 1, config.sigma}, 360);
    }
    if (config.n_bins == 180) {
        if (!std::isfinite(mu_deg) || mu_deg < 0.0 || mu_deg >= 180.0) {
            throw ValidationError("mu must be in [0, 180) for a 180-bin target");
        }
        const double s = clamp_sigma(config.sigma);
        std::vector<double> log_w(180);
        for (int i = 0; i < 180; ++i) {
            const double d = deg_to_rad(i - mu_deg);
            log_w[static_cast<std::size_t>(i)] = -0.5 * d * d / (s * s);
        }
        return DiscreteCircularDistribution::from_mass(exp_shifted(std::move(log_w)), 180);
    }
    throw ValidationError("n_bins must be 180 or 360");
}

}  // namespace orientkit
