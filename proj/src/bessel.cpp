#include "orientkit/bessel.hpp"

#include <cmath>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"

namespace orientkit {

namespace {

// Below this the ascending series is used; above it the large-argument
// expansion is accurate to well under one ulp.
constexpr double kSeriesLimit = 30.0;

void check_finite(double x) {
    if (!std::isfinite(x)) throw DomainError("bessel_i0: argument must be finite");
}

// sum_k (x^2/4)^k / (k!)^2
double ascending_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// exp(-x) I0(x) ~ 1/sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! 8^k x^k); returns the sum only
double asymptotic_sum(double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next > term) break;  // divergent tail
        term = next;
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

}  // namespace

double bessel_i0(double x) {
    check_finite(x);
    x = std::abs(x);
    if (x <= kSeriesLimit) return ascending_series(x);
    return asymptotic_sum(x) * std::exp(x - 0.5 * std::log(2.0 * kPi * x));
}

double bessel_i0_scaled(double x) {
    check_finite(x);
    x = std::abs(x);
    if (x <= kSeriesLimit) return ascending_series(x) * std::exp(-x);
    return asymptotic_sum(x) / std::sqrt(2.0 * kPi * x);
}

}  // namespace orientkit
