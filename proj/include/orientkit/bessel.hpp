#pragma once

namespace orientkit {

/// Modified Bessel function of the first kind, order zero.
///
/// Relative error is below 1e-10 over the whole finite range. Returns +inf
/// once the result exceeds the double range (x > ~713). I0 is even, so
/// negative arguments are accepted. Throws DomainError for NaN or infinity.
double bessel_i0(double x);

/// Exponentially scaled form exp(-|x|) * I0(x); finite for every finite x.
double bessel_i0_scaled(double x);

}  // namespace orientkit
