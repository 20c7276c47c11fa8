#pragma once

#include <map>
#include <vector>

#include "orientkit/circular_dist.hpp"

namespace orientkit {

/// 16 geometrically spaced variances over [0.05, 5.0].
std::vector<double> default_sigma_grid();

/// Search settings for the least-squares periodic fit.
struct FitConfig {
    std::vector<int> alpha_candidates{0, 1, 2, 3, 4, 5, 6, 7, 8};
    double phi_grid_step_deg = 1.0;
    std::vector<double> sigma_grid = default_sigma_grid();
    int refine_iters = 50;
    /// Number of coarse local minima per alpha that get refined.
    int refine_starts = 3;
    /// Minimum relative SSE improvement over the uniform model for alpha >= 1 to win.
    double uniformity_gain_threshold = 0.30;
    /// Relative SSE margin within which the smaller alpha wins.
    double tie_epsilon = 0.02;
};

void validate(const FitConfig& config);

struct FitResult {
    PeriodicVonMisesParams params;
    double sse = 0.0;
    std::map<int, double> per_alpha_sse;
    std::map<int, PeriodicVonMisesParams> per_alpha_params;
    double uniform_sse = 0.0;
    /// (uniform_sse - best alpha>=1 sse) / uniform_sse; 0 when the input is uniform.
    double uniformity_gain = 0.0;
};

/// Sum of squared residuals between `dist` and the renormalized discrete
/// periodic model. alpha = 0 scores against the uniform distribution.
double model_sse(const DiscreteCircularDistribution& dist, const PeriodicVonMisesParams& params);

/// Least-squares fit of (phi, alpha, sigma) to a 360-bin distribution.
///
/// Every alpha >= 1 candidate gets a coarse phi x sigma grid search followed by
/// coordinate-descent refinement from the best few coarse minima. The winner
/// is the smallest alpha within `tie_epsilon` of the best SSE; it is then
/// replaced by alpha = 0 unless it beats the uniform model by the gain
/// threshold (only when 0 is a candidate). The phase is returned in [0, 360/alpha).
FitResult fit_periodic(const DiscreteCircularDistribution& dist, const FitConfig& config = {});

/// Applies the alpha selection rule to per-alpha SSEs. Entries for alpha 0 are
/// ignored; the uniformity gate against `uniform_sse` applies only when 0 is
/// among config.alpha_candidates.
int choose_alpha(const std::map<int, double>& per_alpha_sse, double uniform_sse,
                 const FitConfig& config);

/// Result of fitting a truncated Gaussian to a 180-bin polar distribution.
struct PolarFit {
    double mu_deg = 90.0;
    double sigma = 0.5;
    double sse = 0.0;
};

PolarFit fit_polar(const DiscreteCircularDistribution& dist, const FitConfig& config = {});

/// phi mod (360/alpha). Throws ValidationError for alpha < 1.
double canonicalize_phase(double phi_deg, int alpha);

/// Restricts a fitted periodicity to the label space {0, 1, 2, 4}; anything else maps to 0.
int map_symmetry_class(int alpha_raw);

bool is_symmetry_class(int alpha) noexcept;

struct DecodedOrientation {
    int alpha_hat = 0;
    double azimuth_deg = 0.0;
    double polar_deg = 90.0;
    double inplane_deg = 0.0;
    /// azimuth + k * 360/alpha_hat (mod 360) for k = 0 .. alpha_hat-1.
    std::vector<double> candidates;
};

/// Builds a DecodedOrientation (candidates included) from class and angles.
DecodedOrientation make_decoded(int alpha_hat, double azimuth_deg, double polar_deg, double inplane_deg);

/// Turns predicted azimuth / polar / in-plane distributions into an orientation
/// and symmetry class.
DecodedOrientation decode_prediction(const DiscreteCircularDistribution& azi,
                                     const DiscreteCircularDistribution& pol,
                                     const DiscreteCircularDistribution& rot,
                                     const FitConfig& config = {});

}  // namespace orientkit
