#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Geometry>

#include "oracles.hpp"
#include "orientkit/angles.hpp"
#include "orientkit/errors.hpp"
#include "orientkit/rng.hpp"
#include "orientkit/rotation.hpp"

using namespace orientkit;

namespace {

void check_vec(const Direction3& d, double x, double y, double z) {
    CHECK(std::fabs(d.v.x() - x) <= 1e-12);
    CHECK(std::fabs(d.v.y() - y) <= 1e-12);
    CHECK(std::fabs(d.v.z() - z) <= 1e-12);
}

double max_abs_diff(const RotationMatrix& a, const RotationMatrix& b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

OrientationTriplet random_triplet(CounterRng& rng) {
    return {360.0 * rng.uniform(), 180.0 * rng.uniform(), 360.0 * rng.uniform()};
}

RotationMatrix random_rotation(CounterRng& rng) {
    // uniform unit quaternion
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    return RotationMatrix::from_matrix(q.toRotationMatrix());
}

}  // namespace

TEST_CASE("triplet_to_direction examples") {
    check_vec(triplet_to_direction({0.0, 90.0, 0.0}), 0.0, 0.0, 1.0);
    check_vec(triplet_to_direction({0.0, 90.0, 123.0}), 0.0, 0.0, 1.0);
    check_vec(triplet_to_direction({90.0, 90.0, 0.0}), 1.0, 0.0, 0.0);
    check_vec(triplet_to_direction({0.0, 0.0, 0.0}), 0.0, 1.0, 0.0);
    check_vec(triplet_to_direction({217.0, 0.0, 0.0}), 0.0, 1.0, 0.0);
}

TEST_CASE("triplet_to_rotation examples") {
    CHECK(max_abs_diff(triplet_to_rotation({0.0, 90.0, 0.0}), RotationMatrix::identity()) <= 1e-15);
    CHECK(max_abs_diff(triplet_to_rotation({40.0, 90.0, 0.0}), RotationMatrix::about_y(40.0)) <= 1e-15);
    CHECK(max_abs_diff(triplet_to_rotation({0.0, 90.0, 30.0}), RotationMatrix::about_z(30.0)) <= 1e-15);
}

TEST_CASE("triplet_to_rotation agrees with Eigen's angle-axis composition") {
    CounterRng rng(11);
    for (int i = 0; i < 500; ++i) {
        const auto t = random_triplet(rng);
        const Eigen::Matrix3d want =
            (Eigen::AngleAxisd(deg_to_rad(t.azimuth_deg), Eigen::Vector3d::UnitY()) *
             Eigen::AngleAxisd(deg_to_rad(t.polar_deg - 90.0), Eigen::Vector3d::UnitX()) *
             Eigen::AngleAxisd(deg_to_rad(t.inplane_deg), Eigen::Vector3d::UnitZ()))
                .toRotationMatrix();
        CHECK((triplet_to_rotation(t).matrix() - want).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("the rotation's front axis is the triplet direction") {
    CounterRng rng(12);
    for (int i = 0; i < 500; ++i) {
        const auto t = random_triplet(rng);
        const Eigen::Vector3d front = triplet_to_rotation(t).matrix() * Eigen::Vector3d::UnitZ();
        CHECK((front - triplet_to_direction(t).v).norm() <= 1e-12);
    }
}

TEST_CASE("angular_error_3d examples and errors") {
    const auto z = make_direction({0, 0, 1});
    CHECK(angular_error_3d(z, z) == 0.0);
    CHECK(angular_error_3d(z, make_direction({1, 0, 0})) == doctest::Approx(90.0).epsilon(1e-14));
    CHECK(angular_error_3d(z, make_direction({0, 0, -1})) == 180.0);
    CHECK_THROWS_AS(make_direction({0, 0, 2}), ValidationError);
    Direction3 bad;
    bad.v = {1, 1, 0};
    CHECK_THROWS_AS(angular_error_3d(bad, z), ValidationError);
}

TEST_CASE("angular_error_3d is accurate for tiny angles") {
    const auto a = triplet_to_direction({0.0, 90.0, 0.0});
    const auto b = triplet_to_direction({1e-5, 90.0, 0.0});
    CHECK(angular_error_3d(a, b) == doctest::Approx(1e-5).epsilon(1e-6));
}

TEST_CASE("geodesic_so3 examples") {
    CHECK(geodesic_so3(RotationMatrix::identity(), RotationMatrix::identity()) == 0.0);
    CHECK(geodesic_so3(RotationMatrix::identity(), RotationMatrix::about_y(30.0)) ==
          doctest::Approx(30.0).epsilon(1e-13));
    CHECK(geodesic_so3(RotationMatrix::about_y(10.0), RotationMatrix::about_y(190.0)) ==
          doctest::Approx(180.0).epsilon(1e-13));
}

TEST_CASE("geodesic_so3 matches the quaternion oracle") {
    CounterRng rng(13);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_rotation(rng);
        const auto b = random_rotation(rng);
        CHECK(geodesic_so3(a, b) == doctest::Approx(oracle::rotation_angle_deg(a.matrix(), b.matrix())).epsilon(1e-9));
    }
}

TEST_CASE("geodesic_so3 is a metric on random triples") {
    CounterRng rng(14);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_rotation(rng), b = random_rotation(rng), c = random_rotation(rng);
        const double ab = geodesic_so3(a, b), ba = geodesic_so3(b, a);
        CHECK(ab >= 0.0);
        CHECK(std::fabs(ab - ba) <= 1e-6);
        CHECK(geodesic_so3(a, a) <= 1e-6);
        CHECK(ab <= geodesic_so3(a, c) + geodesic_so3(c, b) + 1e-6);
    }
}

TEST_CASE("rotation invariants hold for random triplets") {
    CounterRng rng(15);
    for (int i = 0; i < 5000; ++i) {
        const auto r = triplet_to_rotation(random_triplet(rng));
        CHECK(r.orthonormality_error() <= 1e-9);
        CHECK(r.determinant_error() <= 1e-9);
    }
}

TEST_CASE("RotationMatrix::from_matrix rejects non-rotations") {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(0, 0) = -1.0;
    CHECK_THROWS_AS(RotationMatrix::from_matrix(m), ValidationError);
    CHECK_THROWS_AS(RotationMatrix::from_matrix(2.0 * Eigen::Matrix3d::Identity()), ValidationError);
    Eigen::Matrix3d n = Eigen::Matrix3d::Identity();
    n(0, 1) = std::nan("");
    CHECK_THROWS_AS(RotationMatrix::from_matrix(n), ValidationError);
}

TEST_CASE("relative_rotation examples") {
    CHECK(max_abs_diff(relative_rotation(RotationMatrix::identity(), RotationMatrix::about_y(40.0)),
                       RotationMatrix::about_y(40.0)) <= 1e-15);
    const auto r = triplet_to_rotation({33.0, 70.0, 12.0});
    CHECK(max_abs_diff(relative_rotation(r, r), RotationMatrix::identity()) <= 1e-15);
    CHECK(max_abs_diff(relative_rotation(RotationMatrix::about_y(30.0), RotationMatrix::about_y(70.0)),
                       RotationMatrix::about_y(40.0)) <= 1e-15);
}

TEST_CASE("relative rotation composed with the reference reproduces the query") {
    CounterRng rng(16);
    for (int i = 0; i < 1000; ++i) {
        const auto ref = random_rotation(rng), query = random_rotation(rng);
        CHECK(max_abs_diff(relative_rotation(ref, query) * ref, query) <= 1e-9);
    }
}

TEST_CASE("relative_from_absolute examples") {
    const OrientationTriplet t{25.0, 60.0, 300.0};
    CHECK(max_abs_diff(relative_from_absolute(t, t), RotationMatrix::identity()) <= 1e-15);
    CHECK(max_abs_diff(relative_from_absolute({0.0, 90.0, 0.0}, {25.0, 90.0, 0.0}), RotationMatrix::about_y(25.0)) <=
          1e-15);
}

TEST_CASE("composed relative rotations accumulate independent azimuth errors") {
    CounterRng rng(17);
    const double kappa = 1.0 / std::pow(deg_to_rad(10.0), 2);
    std::vector<double> marginal, composed;
    for (int i = 0; i < 4000; ++i) {
        const OrientationTriplet ref{360.0 * rng.uniform(), 90.0, 0.0};
        const OrientationTriplet query{360.0 * rng.uniform(), 90.0, 0.0};
        OrientationTriplet ref_n = ref, query_n = query;
        ref_n.azimuth_deg = wrap_deg(ref.azimuth_deg + rad_to_deg(rng.von_mises(0.0, kappa)));
        query_n.azimuth_deg = wrap_deg(query.azimuth_deg + rad_to_deg(rng.von_mises(0.0, kappa)));
        marginal.push_back(geodesic_so3(triplet_to_rotation(query), triplet_to_rotation(query_n)));
        composed.push_back(geodesic_so3(relative_from_absolute(ref, query), relative_from_absolute(ref_n, query_n)));
    }
    CHECK(oracle::lower_median(composed) > oracle::lower_median(marginal));
}

TEST_CASE("direction error ignores in-plane rotation") {
    CounterRng rng(18);
    for (int i = 0; i < 500; ++i) {
        auto a = random_triplet(rng), b = random_triplet(rng);
        const double e = angular_error_3d(triplet_to_direction(a), triplet_to_direction(b));
        a.inplane_deg = 360.0 * rng.uniform();
        b.inplane_deg = 360.0 * rng.uniform();
        CHECK(angular_error_3d(triplet_to_direction(a), triplet_to_direction(b)) == e);
    }
}

TEST_CASE("symmetry_candidates examples") {
    CHECK(symmetry_candidates(30.0, 2) == std::vector<double>{30.0, 210.0});
    CHECK(symmetry_candidates(20.0, 4) == std::vector<double>{20.0, 110.0, 200.0, 290.0});
    CHECK(symmetry_candidates(77.0, 0).empty());
    CHECK(symmetry_candidates(300.0, 2) == std::vector<double>{120.0, 300.0});
    CHECK_THROWS_AS(symmetry_candidates(10.0, 3), ValidationError);
}

TEST_CASE("select_camera_facing examples") {
    CHECK(select_camera_facing(std::vector<double>{30.0, 210.0}) == 30.0);
    CHECK(select_camera_facing(std::vector<double>{20.0, 110.0, 200.0, 290.0}) == 20.0);
    CHECK(select_camera_facing(std::vector<double>{180.0, 90.0, 270.0}) == 90.0);
    CHECK(select_camera_facing(std::vector<double>{350.0, 170.0}) == 350.0);
    CHECK_THROWS_AS(select_camera_facing(std::vector<double>{}), ValidationError);
}

TEST_CASE("select_camera_facing ignores input order") {
    CounterRng rng(19);
    for (int i = 0; i < 300; ++i) {
        const int alpha = std::array{1, 2, 4}[rng.below(3)];
        std::vector<double> c = symmetry_candidates(360.0 * rng.uniform(), alpha);
        const double want = select_camera_facing(c);
        for (int p = 0; p < 4; ++p) {
            for (std::size_t k = c.size(); k > 1; --k) std::swap(c[k - 1], c[rng.below(k)]);
            CHECK(select_camera_facing(c) == want);
        }
    }
    CHECK(select_camera_facing(std::vector<double>{270.0, 90.0}) == 90.0);
}

TEST_CASE("triplet validation and gimbal degeneracy") {
    CHECK_THROWS_AS(validate(OrientationTriplet{360.0, 90.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate(OrientationTriplet{0.0, 180.0, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate(OrientationTriplet{0.0, 90.0, -1.0}), ValidationError);
    CHECK_THROWS_AS(triplet_to_rotation({0.0, -1.0, 0.0}), ValidationError);
    CHECK(is_gimbal_degenerate({10.0, 0.0, 0.0}));
    CHECK_FALSE(is_gimbal_degenerate({10.0, 90.0, 0.0}));
}
