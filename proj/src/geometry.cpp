#include "msvc/geometry.hpp"

#include "msvc/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

namespace msvc {

void CameraModel::validate() const
{
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw Error("camera: focal lengths must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw Error("camera: image size must be positive");
    }
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
        throw Error("camera: principal point outside the image");
    }
}

Mat3 CameraModel::intrinsic_matrix() const
{
    Mat3 k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
}

namespace {

constexpr std::array<std::string_view, 6> kOrderNames = {"XYZ", "XZY", "YXZ", "YZX", "ZXY", "ZYX"};

Mat3 axis_rotation(int axis, double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat3 r = Mat3::Identity();
    switch (axis) {
    case 0:
        r << 1, 0, 0, 0, c, -s, 0, s, c;
        break;
    case 1:
        r << c, 0, s, 0, 1, 0, -s, 0, c;
        break;
    default:
        r << c, -s, 0, s, c, 0, 0, 0, 1;
        break;
    }
    return r;
}

void check_proper_rotation(const Mat3& r)
{
    if (!r.allFinite()) {
        throw Error("pose: rotation is not finite");
    }
    const double ortho = (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (ortho > 1e-9 || std::abs(r.determinant() - 1.0) > 1e-9) {
        throw Error("pose: rotation is not orthonormal with determinant +1");
    }
}

} // namespace

EulerOrder parse_euler_order(std::string_view text)
{
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    for (std::size_t i = 0; i < kOrderNames.size(); ++i) {
        if (upper == kOrderNames[i]) {
            return static_cast<EulerOrder>(i);
        }
    }
    throw Error("unknown Euler order '" + std::string(text) + "'");
}

std::string_view to_string(EulerOrder order)
{
    return kOrderNames[static_cast<std::size_t>(order)];
}

Mat3 euler_to_rotation(const Vec3& euler_xyz, EulerOrder order)
{
    const std::string_view name = to_string(order);
    Mat3 r = Mat3::Identity();
    for (char axis_name : name) {
        const int axis = axis_name - 'X';
        r = r * axis_rotation(axis, euler_xyz[axis]);
    }
    return r;
}

Vec3 rotation_to_euler_zyx(const Mat3& r)
{
    const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
    const double pitch = std::asin(sp);
    double roll = 0.0;
    double yaw = 0.0;
    if (std::abs(sp) < 1.0 - 1e-12) {
        roll = std::atan2(r(2, 1), r(2, 2));
        yaw = std::atan2(r(1, 0), r(0, 0));
    } else {
        // Gimbal lock: fold everything into yaw.
        yaw = std::atan2(-r(0, 1), r(1, 1));
    }
    return {roll, pitch, yaw};
}

FramePose::FramePose()
    : position_(Vec3::Zero()), euler_(Vec3::Zero()), rotation_(Mat3::Identity())
{
}

FramePose FramePose::from_euler(const Vec3& position, const Vec3& euler_xyz, const CameraRig& rig)
{
    if (!position.allFinite() || !euler_xyz.allFinite()) {
        throw Error("pose: non-finite position or orientation");
    }
    FramePose pose;
    pose.position_ = position;
    pose.euler_ = euler_xyz;
    pose.rotation_ = euler_to_rotation(euler_xyz, rig.order) * rig.camera_to_body;
    check_proper_rotation(pose.rotation_);
    return pose;
}

FramePose FramePose::from_rotation(const Vec3& position, const Mat3& camera_to_world)
{
    if (!position.allFinite()) {
        throw Error("pose: non-finite position");
    }
    check_proper_rotation(camera_to_world);
    FramePose pose;
    pose.position_ = position;
    pose.rotation_ = camera_to_world;
    pose.euler_ = rotation_to_euler_zyx(camera_to_world);
    return pose;
}

bool FramePose::operator==(const FramePose& other) const
{
    return position_ == other.position_ && euler_ == other.euler_ && rotation_ == other.rotation_;
}

Projector::Projector(const FramePose& pose, const CameraModel& cam)
    : cam_to_world_(pose.rotation()), fx_(cam.fx), fy_(cam.fy), cx_(cam.cx), cy_(cam.cy)
{
    const Mat3 w2c = pose.rotation().transpose();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            world_to_cam_[static_cast<std::size_t>(r * 3 + c)] = w2c(r, c);
        }
    }
    position_ = {pose.position().x(), pose.position().y(), pose.position().z()};
}

Vec3 Projector::unproject(double x, double y, double depth) const noexcept
{
    const Vec3 cam_point((x - cx_) * depth / fx_, (y - cy_) * depth / fy_, depth);
    return Vec3(position_[0], position_[1], position_[2]) + cam_to_world_ * cam_point;
}

Projection backproject(const VoxelCoord& voxel, const FramePose& pose, const CameraModel& cam)
{
    return Projector(pose, cam).project(voxel.center);
}

double deg_to_rad(double degrees) noexcept
{
    return degrees * (std::numbers::pi / 180.0);
}

double rad_to_deg(double radians) noexcept
{
    return radians * (180.0 / std::numbers::pi);
}

} // namespace msvc
