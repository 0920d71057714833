#pragma once

// Pinhole camera, Euler-angle attitude and world -> pixel projection.
//
// Conventions
//   world frame : right-handed, Z up, meters
//   camera frame: +Z forward (optical axis), +X right, +Y down
//   attitude    : Euler angles (roll about X, pitch about Y, yaw about Z),
//                 composed as intrinsic yaw-pitch-roll by default, so the
//                 camera-to-world rotation is Rz(yaw) * Ry(pitch) * Rx(roll).
//
// A zero attitude therefore looks along world +Z; a nadir camera is
// roll = pi.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace msvc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole intrinsics plus image size. Pixel (i, j) covers [i, i+1) x [j, j+1).
struct CameraModel {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    /// Throws msvc::Error when an invariant is violated.
    void validate() const;

    Mat3 intrinsic_matrix() const;
};

/// Order in which the three elementary rotations are composed, written left
/// to right as they appear in the product. `zyx` is Rz * Ry * Rx.
enum class EulerOrder : std::uint8_t { xyz, xzy, yxz, yzx, zxy, zyx };

EulerOrder parse_euler_order(std::string_view text);
std::string_view to_string(EulerOrder order);

/// Euler angles (radians) stored as (about X, about Y, about Z).
Mat3 euler_to_rotation(const Vec3& euler_xyz, EulerOrder order = EulerOrder::zyx);

/// Recovers (roll, pitch, yaw) from a proper rotation using the default
/// zyx composition. Pitch is in [-pi/2, pi/2].
Vec3 rotation_to_euler_zyx(const Mat3& rotation);

/// Fixed mounting of the camera on the airframe. The telemetry attitude
/// describes the body; camera_to_body rotates camera axes into body axes.
struct CameraRig {
    EulerOrder order = EulerOrder::zyx;
    Mat3 camera_to_body = Mat3::Identity();
};

/// Position and attitude of the camera for one frame.
class FramePose {
public:
    FramePose();

    /// Throws msvc::Error on non-finite components or a non-proper rotation.
    static FramePose from_euler(const Vec3& position, const Vec3& euler_xyz,
                                const CameraRig& rig = {});

    /// Builds a pose directly from a camera-to-world rotation. The Euler
    /// angles are recovered with the zyx convention.
    static FramePose from_rotation(const Vec3& position, const Mat3& camera_to_world);

    const Vec3& position() const noexcept { return position_; }
    const Vec3& euler() const noexcept { return euler_; }

    /// Camera-to-world rotation. Columns are the camera axes in world frame.
    const Mat3& rotation() const noexcept { return rotation_; }

    bool operator==(const FramePose& other) const;

private:
    Vec3 position_;
    Vec3 euler_;
    Mat3 rotation_;
};

/// Voxel center in world coordinates plus its edge length.
struct VoxelCoord {
    Vec3 center;
    double side = 0.0;
};

/// Continuous pixel coordinates and camera-frame depth of a projected point.
struct Projection {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;

    /// True when the point is on or behind the image plane (depth <= 0).
    bool behind_camera() const noexcept { return !(depth > 0.0); }
};

/// Precomputed world -> pixel mapping for one pose. All projection in the
/// library goes through this type so that every caller sees bit-identical
/// results for the same inputs.
class Projector {
public:
    Projector(const FramePose& pose, const CameraModel& cam);

    Projection project(const Vec3& world) const noexcept
    {
        const double dx = world.x() - position_[0];
        const double dy = world.y() - position_[1];
        const double dz = world.z() - position_[2];
        const double xc = world_to_cam_[0] * dx + world_to_cam_[1] * dy + world_to_cam_[2] * dz;
        const double yc = world_to_cam_[3] * dx + world_to_cam_[4] * dy + world_to_cam_[5] * dz;
        const double zc = world_to_cam_[6] * dx + world_to_cam_[7] * dy + world_to_cam_[8] * dz;
        return {fx_ * xc / zc + cx_, fy_ * yc / zc + cy_, zc};
    }

    /// Point at camera depth `depth` behind continuous pixel (x, y).
    Vec3 unproject(double x, double y, double depth) const noexcept;

private:
    std::array<double, 9> world_to_cam_{};
    std::array<double, 3> position_{};
    Mat3 cam_to_world_;
    double fx_, fy_, cx_, cy_;
};

/// World -> image projection of a voxel center. When the voxel sits on or
/// behind the image plane the pixel coordinates are meaningless and
/// Projection::behind_camera() is true.
Projection backproject(const VoxelCoord& voxel, const FramePose& pose, const CameraModel& cam);

/// Half-open image bounds test plus positive depth.
inline bool in_bounds(const Projection& p, const CameraModel& cam) noexcept
{
    return p.depth > 0.0 && p.x >= 0.0 && p.x < static_cast<double>(cam.width) && p.y >= 0.0 &&
           p.y < static_cast<double>(cam.height);
}

/// Degrees <-> radians used everywhere angles cross a file boundary.
double deg_to_rad(double degrees) noexcept;
double rad_to_deg(double radians) noexcept;

} // namespace msvc
