#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace orientkit {

/// Largest periodicity considered by the fitter and accepted by the parameter type.
inline constexpr int kDefaultAlphaMax = 8;

/// Bounds applied to every variance parameter before evaluation.
inline constexpr double kSigmaMin = 1e-3;
inline constexpr double kSigmaMax = 10.0;

/// Probability mass over 1-degree bins of an angular domain.
///
/// Always normalized; the bin count equals the period (360 for azimuth and
/// in-plane rotation, 180 for polar angle). Bin i is centred on i degrees.
class DiscreteCircularDistribution {
public:
    /// Normalizes raw non-negative mass. `raw.size()` must equal `period_deg`,
    /// which must be 180 or 360.
    static DiscreteCircularDistribution from_mass(std::span<const double> raw, int period_deg);

    /// Wraps bins that are already normalized (sum within 1e-9 of one).
    static DiscreteCircularDistribution from_normalized(std::vector<double> bins, int period_deg);

    static DiscreteCircularDistribution uniform(int period_deg);

    [[nodiscard]] std::span<const double> bins() const noexcept { return bins_; }
    [[nodiscard]] double operator[](std::size_t i) const { return bins_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return bins_.size(); }
    [[nodiscard]] int period_deg() const noexcept { return period_; }

    /// Index of the largest bin; the lowest index wins ties.
    [[nodiscard]] std::size_t argmax() const noexcept;
    [[nodiscard]] double max_value() const noexcept;

    /// Circularly rotates the bins so that new[(i + k) mod n] = old[i].
    [[nodiscard]] DiscreteCircularDistribution shifted(int k) const;

private:
    DiscreteCircularDistribution(std::vector<double> bins, int period);

    std::vector<double> bins_;
    int period_ = 360;
};

/// (phase, periodicity, variance) of the periodic von Mises model.
struct PeriodicVonMisesParams {
    double phi_deg = 0.0;
    int alpha = 1;
    double sigma = 0.5;

    friend bool operator==(const PeriodicVonMisesParams&, const PeriodicVonMisesParams&) = default;
};

/// Throws ValidationError unless 0 <= phi < 360, 0 <= alpha <= alpha_max and sigma > 0.
void validate(const PeriodicVonMisesParams& params, int alpha_max = kDefaultAlphaMax);

struct TargetConfig {
    double sigma = 0.5;
    int n_bins = 360;
};

/// Divides every entry by the total. Accepts any length (used for ad-hoc
/// masses in tests and smoothing kernels). Throws on negative or all-zero input.
std::vector<double> normalize(std::span<const double> raw);

/// Clamps a variance into [kSigmaMin, kSigmaMax].
double clamp_sigma(double sigma) noexcept;

/// Continuous periodic von Mises density exp(cos(alpha*delta)/s^2) / (2 pi I0(1/s^2)),
/// with delta in degrees converted to radians. Evaluated in scaled form so
/// that small sigma does not overflow.
double periodic_density(double delta_deg, int alpha, double sigma);

/// Unnormalized discrete model weight exp((cos(alpha*delta) - 1)/sigma^2).
/// Proportional to periodic_density for fixed (alpha, sigma); peak value 1.
double periodic_weight(double delta_deg, int alpha, double sigma);

/// Symmetry-aware azimuth target: the periodic density sampled at every bin
/// centre and renormalized over the bins. alpha = 0 gives the uniform distribution.
DiscreteCircularDistribution make_periodic_target(const PeriodicVonMisesParams& params,
                                                  int n_bins = 360);

/// Single-mode target for in-plane rotation (360 bins, periodic with alpha = 1)
/// or polar angle (180 bins, Gaussian in linear angle truncated to [0, 180)).
DiscreteCircularDistribution make_unimodal_target(double mu_deg, const TargetConfig& config);

/// Truncated-Gaussian polar weight; `sigma` is in radians like the periodic model.
double polar_weight(double delta_deg, double sigma);

}  // namespace orientkit
