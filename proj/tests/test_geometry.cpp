#include "oracles.hpp"

#include "msvc/error.hpp"
#include "msvc/geometry.hpp"

#include <Eigen/Geometry>
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace msvc;

namespace {

CameraModel test_camera()
{
    return {600.0, 600.0, 240.0, 135.0, 480, 270};
}

} // namespace

TEST_CASE("camera model validation")
{
    CHECK_NOTHROW(test_camera().validate());
    CameraModel bad = test_camera();
    bad.fx = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = test_camera();
    bad.cx = 480.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = test_camera();
    bad.height = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("zero euler angles give the identity")
{
    CHECK(euler_to_rotation(Vec3::Zero()).isApprox(Mat3::Identity(), 0.0));
}

TEST_CASE("half turn about x applied twice is the identity")
{
    const Mat3 r = euler_to_rotation(Vec3(std::numbers::pi, 0.0, 0.0));
    CHECK((r * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("euler rotation matches the angle-axis chain and is orthonormal")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 e(angle(rng), angle(rng) / 2.0, angle(rng));
        const Mat3 r = euler_to_rotation(e);
        CHECK((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((r - oracle::rotation_zyx(e[0], e[1], e[2])).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((rotation_to_euler_zyx(r) - e).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("every euler order composes in name order")
{
    const Vec3 e(0.3, -0.2, 1.1);
    const Mat3 x = Eigen::AngleAxisd(e[0], Vec3::UnitX()).toRotationMatrix();
    const Mat3 y = Eigen::AngleAxisd(e[1], Vec3::UnitY()).toRotationMatrix();
    const Mat3 z = Eigen::AngleAxisd(e[2], Vec3::UnitZ()).toRotationMatrix();
    CHECK(euler_to_rotation(e, parse_euler_order("XYZ")).isApprox(x * y * z, 1e-14));
    CHECK(euler_to_rotation(e, parse_euler_order("XZY")).isApprox(x * z * y, 1e-14));
    CHECK(euler_to_rotation(e, parse_euler_order("YXZ")).isApprox(y * x * z, 1e-14));
    CHECK(euler_to_rotation(e, parse_euler_order("YZX")).isApprox(y * z * x, 1e-14));
    CHECK(euler_to_rotation(e, parse_euler_order("ZXY")).isApprox(z * x * y, 1e-14));
    CHECK(euler_to_rotation(e, parse_euler_order("ZYX")).isApprox(z * y * x, 1e-14));
    CHECK(to_string(parse_euler_order("zyx")) == "ZYX");
    CHECK_THROWS_AS(parse_euler_order("ZZX"), Error);
}

TEST_CASE("pose rejects non-finite input")
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(FramePose::from_euler(Vec3(nan, 0, 0), Vec3::Zero()), Error);
    CHECK_THROWS_AS(FramePose::from_euler(Vec3::Zero(), Vec3(0, nan, 0)), Error);
    Mat3 skew = Mat3::Identity();
    skew(0, 1) = 0.1;
    CHECK_THROWS_AS(FramePose::from_rotation(Vec3::Zero(), skew), Error);
    CHECK_THROWS_AS(FramePose::from_rotation(Vec3::Zero(), -Mat3::Identity()), Error);
}

TEST_CASE("point on the optical axis projects to the principal point")
{
    const CameraModel cam = test_camera();
    const FramePose pose = FramePose::from_euler(Vec3(1.0, 2.0, 3.0), Vec3::Zero());
    const Projection p = backproject({Vec3(1.0, 2.0, 13.0), 0.5}, pose, cam);
    CHECK(p.x == cam.cx);
    CHECK(p.y == cam.cy);
    CHECK(p.depth == 10.0);
    CHECK_FALSE(p.behind_camera());
}

TEST_CASE("voxel at the camera position is flagged degenerate")
{
    const FramePose pose = FramePose::from_euler(Vec3(1.0, 2.0, 3.0), Vec3(0.1, 0.2, 0.3));
    const Projection p = backproject({Vec3(1.0, 2.0, 3.0), 0.5}, pose, test_camera());
    CHECK(p.depth == 0.0);
    CHECK(p.behind_camera());
}

TEST_CASE("nadir camera looks down")
{
    const FramePose pose = FramePose::from_euler(Vec3(0.0, 0.0, 50.0), Vec3(std::numbers::pi, 0.0, 0.0));
    const Projection p = Projector(pose, test_camera()).project(Vec3(0.0, 0.0, 0.0));
    CHECK(p.depth == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(p.x == doctest::Approx(240.0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(135.0).epsilon(1e-12));
    // World +x stays image right, world +y becomes image up.
    const Projection right = Projector(pose, test_camera()).project(Vec3(1.0, 0.0, 0.0));
    const Projection north = Projector(pose, test_camera()).project(Vec3(0.0, 1.0, 0.0));
    CHECK(right.x > 240.0);
    CHECK(north.y < 135.0);
}

TEST_CASE("projection matches an independent matrix-chain projector")
{
    const CameraModel cam = test_camera();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> coord(-100.0, 100.0);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 e(angle(rng), angle(rng) / 2.0, angle(rng));
        const Vec3 pos(coord(rng), coord(rng), coord(rng));
        const Vec3 world(coord(rng), coord(rng), coord(rng));
        const FramePose pose = FramePose::from_euler(pos, e);
        const Projection p = backproject({world, 0.5}, pose, cam);

        const Mat3 r = oracle::rotation_zyx(e[0], e[1], e[2]);
        const Vec3 xc = r.transpose() * (world - pos);
        const Vec3 h = cam.intrinsic_matrix() * xc;
        CHECK(p.depth == doctest::Approx(xc.z()).epsilon(1e-12));
        if (xc.z() > 1.0) {
            CHECK(std::abs(p.x - h.x() / h.z()) < 1e-6);
            CHECK(std::abs(p.y - h.y() / h.z()) < 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("moving a point along its ray keeps the pixel and scales depth")
{
    const CameraModel cam = test_camera();
    const FramePose pose = FramePose::from_euler(Vec3(3.0, -4.0, 40.0), Vec3(2.9, 0.2, 0.7));
    const Projector proj(pose, cam);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> px(0.0, 480.0);
    std::uniform_real_distribution<double> py(0.0, 270.0);
    std::uniform_real_distribution<double> depth(1.0, 200.0);
    for (int i = 0; i < 500; ++i) {
        const double x = px(rng);
        const double y = py(rng);
        const double d = depth(rng);
        const Projection a = proj.project(proj.unproject(x, y, d));
        const Projection b = proj.project(proj.unproject(x, y, 2.5 * d));
        CHECK(std::abs(a.x - x) < 1e-6);
        CHECK(std::abs(a.y - y) < 1e-6);
        CHECK(std::abs(a.x - b.x) < 1e-9);
        CHECK(std::abs(a.y - b.y) < 1e-9);
        CHECK(b.depth == doctest::Approx(2.5 * a.depth).epsilon(1e-12));
    }
}

TEST_CASE("image bounds are half-open")
{
    const CameraModel cam = test_camera();
    CHECK(in_bounds({240.0, 135.0, 5.0}, cam));
    CHECK_FALSE(in_bounds({480.0, 0.0, 5.0}, cam));
    CHECK(in_bounds({0.0, 0.0, 5.0}, cam));
    CHECK(in_bounds({479.999, 269.999, 5.0}, cam));
    CHECK_FALSE(in_bounds({10.0, 10.0, -1.0}, cam));
    CHECK_FALSE(in_bounds({-0.001, 10.0, 5.0}, cam));
}

TEST_CASE("camera mounting rotates the body attitude")
{
    CameraRig rig;
    rig.camera_to_body = euler_to_rotation(Vec3(std::numbers::pi, 0.0, 0.0));
    const FramePose pose = FramePose::from_euler(Vec3::Zero(), Vec3::Zero(), rig);
    CHECK(pose.rotation().isApprox(rig.camera_to_body, 1e-15));
}
