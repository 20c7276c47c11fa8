#include "orientkit/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"
#include "orientkit/periodic_fit.hpp"

namespace orientkit {

namespace {

void check_range(double v, double hi, const char* name) {
    if (!std::isfinite(v) || v < 0.0 || v >= hi) {
        throw ValidationError(std::string(name) + " must be in [0, " + std::to_string(static_cast<int>(hi)) +
                              "), got " + std::to_string(v));
    }
}

}  // namespace

void validate(const OrientationTriplet& t) {
    check_range(t.azimuth_deg, 360.0, "azimuth_deg");
    check_range(t.polar_deg, 180.0, "polar_deg");
    check_range(t.inplane_deg, 360.0, "inplane_deg");
}

bool is_gimbal_degenerate(const OrientationTriplet& t) noexcept {
    return t.polar_deg < 1e-6 || t.polar_deg > 180.0 - 1e-6;
}

RotationMatrix RotationMatrix::from_matrix(const Eigen::Matrix3d& m, double tol) {
    if (!m.allFinite()) throw ValidationError("rotation matrix has non-finite entries");
    RotationMatrix r(m);
    if (r.orthonormality_error() > tol) throw ValidationError("matrix is not orthonormal");
    if (r.determinant_error() > tol) throw ValidationError("matrix determinant is not +1");
    return r;
}

RotationMatrix RotationMatrix::about_x(double deg) {
    const double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, c, -s, 0, s, c;
    return RotationMatrix(m);
}

RotationMatrix RotationMatrix::about_y(double deg) {
    const double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
    Eigen::Matrix3d m;
    m << c, 0, s, 0, 1, 0, -s, 0, c;
    return RotationMatrix(m);
}

RotationMatrix RotationMatrix::about_z(double deg) {
    const double c = std::cos(deg_to_rad(deg)), s = std::sin(deg_to_rad(deg));
    Eigen::Matrix3d m;
    m << c, -s, 0, s, c, 0, 0, 0, 1;
    return RotationMatrix(m);
}

double RotationMatrix::orthonormality_error() const {
    return (m_.transpose() * m_ - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
}

double RotationMatrix::determinant_error() const { return std::abs(m_.determinant() - 1.0); }

Direction3 make_direction(const Eigen::Vector3d& v) {
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-9) throw ValidationError("direction must be a unit vector");
    return Direction3{v};
}

Direction3 triplet_to_direction(const OrientationTriplet& t) {
    validate(t);
    const double az = deg_to_rad(t.azimuth_deg);
    const double pol = deg_to_rad(t.polar_deg);
    return Direction3{Eigen::Vector3d(std::sin(az) * std::sin(pol), std::cos(pol), std::cos(az) * std::sin(pol))};
}

RotationMatrix triplet_to_rotation(const OrientationTriplet& t) {
    validate(t);
    return RotationMatrix::about_y(t.azimuth_deg) * RotationMatrix::about_x(t.polar_deg - 90.0) *
           RotationMatrix::about_z(t.inplane_deg);
}

double angular_error_3d(const Direction3& a, const Direction3& b) {
    make_direction(a.v);
    make_direction(b.v);
    // atan2 form of arccos(a.b); stays accurate near 0 and 180 degrees.
    return rad_to_deg(std::atan2(a.v.cross(b.v).norm(), std::clamp(a.v.dot(b.v), -1.0, 1.0)));
}

double geodesic_so3(const RotationMatrix& r1, const RotationMatrix& r2) {
    RotationMatrix::from_matrix(r1.matrix());
    RotationMatrix::from_matrix(r2.matrix());
    const Eigen::Matrix3d d = r1.matrix().transpose() * r2.matrix();
    const double cos_t = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
    const Eigen::Vector3d axis(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    const double sin_t = 0.5 * axis.norm();
    return rad_to_deg(std::atan2(sin_t, cos_t));
}

RotationMatrix relative_rotation(const RotationMatrix& reference, const RotationMatrix& query) {
    return query * reference.transposed();
}

RotationMatrix relative_from_absolute(const OrientationTriplet& ref, const OrientationTriplet& query) {
    return relative_rotation(triplet_to_rotation(ref), triplet_to_rotation(query));
}

std::vector<double> symmetry_candidates(double phi_deg, int alpha) {
    if (!is_symmetry_class(alpha)) throw ValidationError("alpha must be one of {0, 1, 2, 4}");
    if (!std::isfinite(phi_deg)) throw ValidationError("phi must be finite");
    std::vector<double> out;
    for (int k = 0; k < alpha; ++k) out.push_back(wrap_deg(phi_deg + k * 360.0 / alpha));
    std::sort(out.begin(), out.end());
    return out;
}

double select_camera_facing(std::span<const double> candidates) {
    if (candidates.empty()) throw ValidationError("no candidates to select from");
    double best = candidates.front();
    double best_dist = circular_dist_deg(best, 0.0);
    for (double c : candidates.subspan(1)) {
        const double d = circular_dist_deg(c, 0.0);
        if (d < best_dist || (d == best_dist && c < best)) {
            best = c;
            best_dist = d;
        }
    }
    return best;
}

}  // namespace orientkit
