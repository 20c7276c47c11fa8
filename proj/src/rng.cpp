#include "orientkit/rng.hpp"

#include <algorithm>
#include <cmath>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"

namespace orientkit {

double CounterRng::normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double CounterRng::von_mises(double mu_rad, double kappa) {
    if (std::isnan(kappa) || kappa < 0.0) throw ValidationError("von Mises kappa must be >= 0");
    if (std::isinf(kappa)) return mu_rad;
    if (kappa < 1e-8) return mu_rad + 2.0 * kPi * uniform() - kPi;
    if (kappa > 1e8) return mu_rad + normal() / std::sqrt(kappa);

    // Best & Fisher (1979), wrapped Cauchy envelope.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    double f = 0.0;
    for (;;) {
        const double u1 = uniform();
        const double u2 = uniform();
        const double z = std::cos(kPi * u1);
        f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0) break;
        if (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double theta = std::acos(std::clamp(f, -1.0, 1.0));
    return uniform() < 0.5 ? mu_rad - theta : mu_rad + theta;
}

}  // namespace orientkit
