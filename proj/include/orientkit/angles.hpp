#pragma once

#include <cmath>
#include <numbers>

namespace orientkit {

inline constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Wraps an angle into [0, period).
inline double wrap_deg(double deg, double period = 360.0) noexcept {
    double r = std::fmod(deg, period);
    if (r < 0.0) r += period;
    // fmod of a tiny negative value can round up to exactly `period`
    if (r >= period) r -= period;
    return r;
}

/// Shortest signed difference a - b on a circle of the given period, in [-period/2, period/2).
inline double circular_diff_deg(double a, double b, double period = 360.0) noexcept {
    return wrap_deg(a - b + period / 2.0, period) - period / 2.0;
}

inline double circular_dist_deg(double a, double b, double period = 360.0) noexcept {
    return std::abs(circular_diff_deg(a, b, period));
}

/// Rounds to 6 decimal places; angles are serialized at this precision.
inline double quantize_angle(double deg) noexcept { return std::round(deg * 1e6) / 1e6; }

}  // namespace orientkit
