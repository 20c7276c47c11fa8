#include "orientkit/periodic_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"

namespace orientkit {

namespace {

constexpr int kAziBins = 360;
constexpr int kPolBins = 180;

// Residual sum of squares against the model exp(log_w) / sum(exp(log_w)).
template <typename LogWeight>
double renormalized_sse(std::span<const double> h, LogWeight&& log_weight) {
    const std::size_t n = h.size();
    std::vector<double> w(n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = log_weight(static_cast<int>(i));
        top = std::max(top, w[i]);
    }
    double z = 0.0;
    for (double& v : w) {
        v = std::exp(v - top);
        z += v;
    }
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = h[i] - w[i] / z;
        sse += r * r;
    }
    return sse;
}

double periodic_sse(std::span<const double> h, double phi, int alpha, double sigma) {
    const double k = 1.0 / (sigma * sigma);
    return renormalized_sse(h, [&](int i) {
        return (std::cos(alpha * deg_to_rad(i - phi)) - 1.0) * k;
    });
}

double polar_sse(std::span<const double> h, double mu, double sigma) {
    const double k = 0.5 / (sigma * sigma);
    return renormalized_sse(h, [&](int i) {
        const double d = deg_to_rad(i - mu);
        return -d * d * k;
    });
}

double uniform_sse_of(std::span<const double> h) {
    const double u = 1.0 / static_cast<double>(h.size());
    double sse = 0.0;
    for (double v : h) sse += (v - u) * (v - u);
    return sse;
}

// Number of grid sub-offsets per degree when the phase step is 1/S, else 0.
int sub_steps_per_degree(double step) {
    const double s = 1.0 / step;
    const double r = std::round(s);
    if (r >= 1.0 && r <= 64.0 && std::abs(r - s) < 1e-9) return static_cast<int>(r);
    return 0;
}

struct Candidate {
    double phi;
    double sigma;
    double sse;
};

// Coordinate descent on (phi, log sigma) with a shrinking step. Only strict
// improvements are accepted, so the result is never worse than the start.
template <typename Objective, typename PhiMap>
Candidate refine(const Candidate& start, double phi_step, double log_sigma_step, int iters,
                 Objective&& objective, PhiMap&& map_phi) {
    Candidate cur = start;
    double dphi = phi_step;
    double dls = log_sigma_step;
    const double ls_lo = std::log(kSigmaMin);
    const double ls_hi = std::log(kSigmaMax);
    for (int it = 0; it < iters; ++it) {
        const double ls = std::log(cur.sigma);
        const Candidate trials[4] = {
            {map_phi(cur.phi + dphi), cur.sigma, 0.0},
            {map_phi(cur.phi - dphi), cur.sigma, 0.0},
            {cur.phi, std::exp(std::clamp(ls + dls, ls_lo, ls_hi)), 0.0},
            {cur.phi, std::exp(std::clamp(ls - dls, ls_lo, ls_hi)), 0.0},
        };
        Candidate best = cur;
        for (Candidate t : trials) {
            t.sse = objective(t.phi, t.sigma);
            if (t.sse < best.sse) best = t;
        }
        if (best.sse < cur.sse) {
            cur = best;
        } else {
            dphi *= 0.5;
            dls *= 0.5;
            if (dphi < 1e-7 && dls < 1e-9) break;
        }
    }
    return cur;
}

// Coarse grid: for every phase grid point, the best SSE over the sigma grid.
struct Profile {
    std::vector<double> sse;
    std::vector<std::size_t> sigma_index;
};

// Picks up to `count` local minima (circular when `wrap`) of the profile, best first.
std::vector<std::size_t> profile_starts(const Profile& p, int count, bool wrap) {
    const std::size_t n = p.sse.size();
    std::vector<std::size_t> minima;
    for (std::size_t k = 0; k < n; ++k) {
        const bool has_prev = wrap || k > 0;
        const bool has_next = wrap || k + 1 < n;
        const double prev = has_prev ? p.sse[(k + n - 1) % n] : std::numeric_limits<double>::infinity();
        const double next = has_next ? p.sse[(k + 1) % n] : std::numeric_limits<double>::infinity();
        if (p.sse[k] <= prev && p.sse[k] <= next) minima.push_back(k);
    }
    if (minima.empty()) {
        minima.push_back(static_cast<std::size_t>(
            std::distance(p.sse.begin(), std::min_element(p.sse.begin(), p.sse.end()))));
    }
    std::stable_sort(minima.begin(), minima.end(),
                     [&](std::size_t a, std::size_t b) { return p.sse[a] < p.sse[b]; });
    if (minima.size() > static_cast<std::size_t>(count)) minima.resize(static_cast<std::size_t>(count));
    return minima;
}

double log_sigma_spacing(const std::vector<double>& grid) {
    if (grid.size() < 2) return 0.1;
    return std::log(grid.back() / grid.front()) / static_cast<double>(grid.size() - 1);
}

Profile azimuth_profile(std::span<const double> h, int alpha, const FitConfig& cfg) {
    const double window = 360.0 / alpha;
    const double step = cfg.phi_grid_step_deg;
    const auto n_phi = static_cast<std::size_t>(std::ceil(window / step - 1e-9));
    Profile prof{std::vector<double>(n_phi, std::numeric_limits<double>::infinity()),
                 std::vector<std::size_t>(n_phi, 0)};
    const int subs = sub_steps_per_degree(step);
    double hh = 0.0;
    for (double v : h) hh += v * v;

    for (std::size_t si = 0; si < cfg.sigma_grid.size(); ++si) {
        const double sigma = clamp_sigma(cfg.sigma_grid[si]);
        if (subs > 0) {
            // Integer-degree shifts of one template per sub-offset.
            const double kappa = 1.0 / (sigma * sigma);
            std::vector<std::vector<double>> tables(static_cast<std::size_t>(subs));
            std::vector<double> z(static_cast<std::size_t>(subs)), w2(static_cast<std::size_t>(subs));
            for (int m = 0; m < subs; ++m) {
                auto& t = tables[static_cast<std::size_t>(m)];
                t.resize(kAziBins);
                const double off = static_cast<double>(m) / subs;
                double top = -std::numeric_limits<double>::infinity();
                for (int d = 0; d < kAziBins; ++d) {
                    t[static_cast<std::size_t>(d)] = (std::cos(alpha * deg_to_rad(d - off)) - 1.0) * kappa;
                    top = std::max(top, t[static_cast<std::size_t>(d)]);
                }
                double zs = 0.0, ws = 0.0;
                for (double& v : t) {
                    v = std::exp(v - top);
                    zs += v;
                    ws += v * v;
                }
                z[static_cast<std::size_t>(m)] = zs;
                w2[static_cast<std::size_t>(m)] = ws;
            }
            for (std::size_t k = 0; k < n_phi; ++k) {
                const auto j = static_cast<int>(k) / subs;
                const auto m = static_cast<std::size_t>(static_cast<int>(k) % subs);
                const auto& t = tables[m];
                double cross = 0.0;
                for (int i = 0; i < kAziBins; ++i) {
                    cross += h[static_cast<std::size_t>(i)] *
                             t[static_cast<std::size_t>((i - j + kAziBins) % kAziBins)];
                }
                const double sse = hh - 2.0 * cross / z[m] + w2[m] / (z[m] * z[m]);
                if (sse < prof.sse[k]) {
                    prof.sse[k] = sse;
                    prof.sigma_index[k] = si;
                }
            }
        } else {
            for (std::size_t k = 0; k < n_phi; ++k) {
                const double sse = periodic_sse(h, static_cast<double>(k) * step, alpha, sigma);
                if (sse < prof.sse[k]) {
                    prof.sse[k] = sse;
                    prof.sigma_index[k] = si;
                }
            }
        }
    }
    return prof;
}

Candidate fit_single_alpha(std::span<const double> h, int alpha, const FitConfig& cfg) {
    const double window = 360.0 / alpha;
    const Profile prof = azimuth_profile(h, alpha, cfg);
    auto objective = [&](double phi, double sigma) { return periodic_sse(h, phi, alpha, sigma); };
    auto map_phi = [&](double phi) { return wrap_deg(phi, window); };

    Candidate best{0.0, 1.0, std::numeric_limits<double>::infinity()};
    for (std::size_t k : profile_starts(prof, cfg.refine_starts, true)) {
        Candidate start{static_cast<double>(k) * cfg.phi_grid_step_deg,
                        clamp_sigma(cfg.sigma_grid[prof.sigma_index[k]]), 0.0};
        start.sse = objective(start.phi, start.sigma);
        const Candidate c = refine(start, 0.5 * cfg.phi_grid_step_deg,
                                   0.5 * log_sigma_spacing(cfg.sigma_grid), cfg.refine_iters,
                                   objective, map_phi);
        if (c.sse < best.sse) best = c;
    }
    best.phi = wrap_deg(best.phi, window);
    return best;
}

void check_azimuth_input(const DiscreteCircularDistribution& dist) {
    if (dist.size() != kAziBins || dist.period_deg() != 360) {
        throw ValidationError("periodic fit needs a 360-bin distribution");
    }
}

}  // namespace

std::vector<double> default_sigma_grid() {
    constexpr int n = 16;
    const double lo = 0.05, hi = 5.0;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, i / double(n - 1));
    grid.back() = hi;
    return grid;
}

void validate(const FitConfig& config) {
    if (config.alpha_candidates.empty()) throw ValidationError("alpha_candidates must not be empty");
    for (int a : config.alpha_candidates) {
        if (a < 0 || a > kDefaultAlphaMax) {
            throw ValidationError("alpha candidate out of range: " + std::to_string(a));
        }
    }
    if (!(config.phi_grid_step_deg > 0.0) || !std::isfinite(config.phi_grid_step_deg)) {
        throw ValidationError("phi_grid_step_deg must be > 0");
    }
    if (config.sigma_grid.empty()) throw ValidationError("sigma_grid must not be empty");
    for (double s : config.sigma_grid) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("sigma_grid entries must be > 0");
    }
    if (config.refine_iters < 0) throw ValidationError("refine_iters must be >= 0");
    if (config.refine_starts < 1) throw ValidationError("refine_starts must be >= 1");
    if (!(config.uniformity_gain_threshold > 0.0 && config.uniformity_gain_threshold < 1.0)) {
        throw ValidationError("uniformity_gain_threshold must be in (0, 1)");
    }
    if (!(config.tie_epsilon >= 0.0)) throw ValidationError("tie_epsilon must be >= 0");
}

double model_sse(const DiscreteCircularDistribution& dist, const PeriodicVonMisesParams& params) {
    check_azimuth_input(dist);
    validate(params);
    if (params.alpha == 0) return uniform_sse_of(dist.bins());
    return periodic_sse(dist.bins(), params.phi_deg, params.alpha, clamp_sigma(params.sigma));
}

int choose_alpha(const std::map<int, double>& per_alpha_sse, double uniform_sse,
                 const FitConfig& config) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [a, sse] : per_alpha_sse) {
        if (a >= 1) best = std::min(best, sse);
    }
    const bool allow_zero =
        std::find(config.alpha_candidates.begin(), config.alpha_candidates.end(), 0) != config.alpha_candidates.end();
    if (!std::isfinite(best)) return 0;
    if (allow_zero) {
        if (!(uniform_sse > 0.0)) return 0;
        if ((uniform_sse - best) / uniform_sse < config.uniformity_gain_threshold) return 0;
    }
    for (const auto& [a, sse] : per_alpha_sse) {  // ascending alpha
        if (a >= 1 && sse <= best * (1.0 + config.tie_epsilon)) return a;
    }
    return 0;
}

FitResult fit_periodic(const DiscreteCircularDistribution& dist, const FitConfig& config) {
    check_azimuth_input(dist);
    validate(config);
    const auto h = dist.bins();

    std::vector<int> alphas = config.alpha_candidates;
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

    FitResult result;
    result.uniform_sse = uniform_sse_of(h);
    double best_nonzero = std::numeric_limits<double>::infinity();
    for (int a : alphas) {
        if (a == 0) {
            result.per_alpha_sse[0] = result.uniform_sse;
            result.per_alpha_params[0] = {0.0, 0, kSigmaMax};
            continue;
        }
        const Candidate c = fit_single_alpha(h, a, config);
        result.per_alpha_sse[a] = c.sse;
        result.per_alpha_params[a] = {c.phi, a, c.sigma};
        best_nonzero = std::min(best_nonzero, c.sse);
    }
    if (result.uniform_sse > 0.0 && std::isfinite(best_nonzero)) {
        result.uniformity_gain = (result.uniform_sse - best_nonzero) / result.uniform_sse;
    }
    const int alpha = choose_alpha(result.per_alpha_sse, result.uniform_sse, config);
    if (alpha == 0) {
        result.params = {0.0, 0, kSigmaMax};
        result.sse = result.uniform_sse;
    } else {
        result.params = result.per_alpha_params.at(alpha);
        result.sse = result.per_alpha_sse.at(alpha);
    }
    return result;
}

PolarFit fit_polar(const DiscreteCircularDistribution& dist, const FitConfig& config) {
    if (dist.size() != kPolBins || dist.period_deg() != 180) {
        throw ValidationError("polar fit needs a 180-bin distribution");
    }
    validate(config);
    const auto h = dist.bins();
    const double step = config.phi_grid_step_deg;
    const auto n_mu = static_cast<std::size_t>(std::ceil(180.0 / step - 1e-9));

    Profile prof{std::vector<double>(n_mu, std::numeric_limits<double>::infinity()),
                 std::vector<std::size_t>(n_mu, 0)};
    for (std::size_t si = 0; si < config.sigma_grid.size(); ++si) {
        const double sigma = clamp_sigma(config.sigma_grid[si]);
        for (std::size_t k = 0; k < n_mu; ++k) {
            const double sse = polar_sse(h, static_cast<double>(k) * step, sigma);
            if (sse < prof.sse[k]) {
                prof.sse[k] = sse;
                prof.sigma_index[k] = si;
            }
        }
    }

    auto objective = [&](double mu, double sigma) { return polar_sse(h, mu, sigma); };
    auto map_mu = [](double mu) { return std::clamp(mu, 0.0, std::nextafter(180.0, 0.0)); };
    Candidate best{90.0, 0.5, std::numeric_limits<double>::infinity()};
    for (std::size_t k : profile_starts(prof, config.refine_starts, false)) {
        Candidate start{static_cast<double>(k) * step, clamp_sigma(config.sigma_grid[prof.sigma_index[k]]), 0.0};
        start.sse = objective(start.phi, start.sigma);
        const Candidate c = refine(start, 0.5 * step, 0.5 * log_sigma_spacing(config.sigma_grid),
                                   config.refine_iters, objective, map_mu);
        if (c.sse < best.sse) best = c;
    }
    return {best.phi, best.sigma, best.sse};
}

double canonicalize_phase(double phi_deg, int alpha) {
    if (alpha < 1) throw ValidationError("phase is undefined for alpha < 1");
    if (!std::isfinite(phi_deg)) throw ValidationError("phase must be finite");
    return wrap_deg(phi_deg, 360.0 / alpha);
}

bool is_symmetry_class(int alpha) noexcept { return alpha == 0 || alpha == 1 || alpha == 2 || alpha == 4; }

int map_symmetry_class(int alpha_raw) {
    if (alpha_raw < 0) throw ValidationError("periodicity must be >= 0");
    return is_symmetry_class(alpha_raw) ? alpha_raw : 0;
}

DecodedOrientation make_decoded(int alpha_hat, double azimuth_deg, double polar_deg, double inplane_deg) {
    if (!is_symmetry_class(alpha_hat)) throw ValidationError("alpha_hat must be one of {0, 1, 2, 4}");
    DecodedOrientation out;
    out.alpha_hat = alpha_hat;
    out.polar_deg = polar_deg;
    out.inplane_deg = inplane_deg;
    if (alpha_hat == 0) {
        out.azimuth_deg = wrap_deg(azimuth_deg);
        return out;
    }
    out.azimuth_deg = canonicalize_phase(azimuth_deg, alpha_hat);
    const double period = 360.0 / alpha_hat;
    for (int k = 0; k < alpha_hat; ++k) out.candidates.push_back(wrap_deg(out.azimuth_deg + k * period));
    return out;
}

DecodedOrientation decode_prediction(const DiscreteCircularDistribution& azi,
                                     const DiscreteCircularDistribution& pol,
                                     const DiscreteCircularDistribution& rot,
                                     const FitConfig& config) {
    if (rot.size() != kAziBins) throw ValidationError("in-plane distribution needs 360 bins");
    const FitResult az = fit_periodic(azi, config);
    const int alpha_hat = map_symmetry_class(az.params.alpha);

    FitConfig rot_cfg = config;
    rot_cfg.alpha_candidates = {1};
    const FitResult rf = fit_periodic(rot, rot_cfg);
    const PolarFit pf = fit_polar(pol, config);

    return make_decoded(alpha_hat, az.params.phi_deg, pf.mu_deg, rf.params.phi_deg);
}

}  // namespace orientkit
