#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace orientkit {

/// Object pose as azimuth [0,360), polar [0,180) and in-plane [0,360) angles.
///
/// Frame: x right, y up, z toward the viewer. Azimuth 0 faces the camera;
/// polar is measured from +y, so 90 is horizontal.
struct OrientationTriplet {
    double azimuth_deg = 0.0;
    double polar_deg = 90.0;
    double inplane_deg = 0.0;

    friend bool operator==(const OrientationTriplet&, const OrientationTriplet&) = default;
};

void validate(const OrientationTriplet& t);

/// True at the poles, where azimuth is not identifiable.
bool is_gimbal_degenerate(const OrientationTriplet& t) noexcept;

/// Element of SO(3). Construction from an arbitrary matrix is checked.
class RotationMatrix {
public:
    RotationMatrix() : m_(Eigen::Matrix3d::Identity()) {}

    /// Throws ValidationError unless R^T R = I and det R = +1 within `tol` per entry.
    static RotationMatrix from_matrix(const Eigen::Matrix3d& m, double tol = 1e-9);

    static RotationMatrix identity() { return {}; }
    static RotationMatrix about_x(double deg);
    static RotationMatrix about_y(double deg);
    static RotationMatrix about_z(double deg);

    [[nodiscard]] const Eigen::Matrix3d& matrix() const noexcept { return m_; }
    [[nodiscard]] double operator()(int r, int c) const { return m_(r, c); }
    [[nodiscard]] RotationMatrix transposed() const { return RotationMatrix(m_.transpose()); }

    friend RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
        return RotationMatrix(a.m_ * b.m_);
    }

    /// Max-abs deviation from orthonormality and from det = 1.
    [[nodiscard]] double orthonormality_error() const;
    [[nodiscard]] double determinant_error() const;

private:
    explicit RotationMatrix(const Eigen::Matrix3d& m) : m_(m) {}

    Eigen::Matrix3d m_;
};

/// Unit 3-vector.
struct Direction3 {
    Eigen::Vector3d v = Eigen::Vector3d::UnitZ();
};

/// Throws ValidationError unless |v| = 1 within 1e-9.
Direction3 make_direction(const Eigen::Vector3d& v);

/// Front-facing direction; in-plane rotation does not affect it.
Direction3 triplet_to_direction(const OrientationTriplet& t);

/// R_y(azimuth) * R_x(polar - 90) * R_z(inplane): maps the canonical front
/// pose (facing +z, upright) to the observed pose.
RotationMatrix triplet_to_rotation(const OrientationTriplet& t);

/// Angle between two directions in degrees, [0, 180].
double angular_error_3d(const Direction3& a, const Direction3& b);

/// Rotation angle of r1^T r2 in degrees, [0, 180].
double geodesic_so3(const RotationMatrix& r1, const RotationMatrix& r2);

/// query * reference^T, so that relative * reference == query.
RotationMatrix relative_rotation(const RotationMatrix& reference, const RotationMatrix& query);

/// Relative rotation composed from two absolute orientations.
RotationMatrix relative_from_absolute(const OrientationTriplet& ref, const OrientationTriplet& query);

/// Equivalent front-face azimuths for a symmetry class, sorted ascending.
/// Empty for alpha = 0. Throws unless alpha is in {0, 1, 2, 4}.
std::vector<double> symmetry_candidates(double phi_deg, int alpha);

/// Candidate closest to azimuth 0 (facing the camera); ties go to the smaller azimuth.
double select_camera_facing(std::span<const double> candidates);

}  // namespace orientkit
