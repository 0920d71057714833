#pragma once

// Posed RGB-D scenes on disk.
//
// A scene is described by a plain-text manifest (see docs/manifest.md):
//
//   msvc-manifest 1
//   scene <name>
//   camera <fx> <fy> <cx> <cy> <width> <height>
//   euler_order ZYX                                    (optional)
//   camera_to_body <roll> <pitch> <yaw>                (optional, degrees)
//   grid <minx> <miny> <minz> <lx> <ly> <lz> <bx> <by> <bz>   (optional)
//   frame <id> <rgb> <depth> <x> <y> <z> <yaw> <pitch> <roll> [train|test]
//
// Paths are relative to the manifest's directory, angles are degrees.

#include "msvc/carving.hpp"
#include "msvc/geometry.hpp"
#include "msvc/image.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace msvc {

enum class Split : std::uint8_t { none, train, test };

std::string_view to_string(Split split);

struct FrameRecord {
    int id = 0;
    std::filesystem::path rgb;   ///< absolute after loading
    std::filesystem::path depth; ///< absolute after loading
    Vec3 position = Vec3::Zero();
    Vec3 attitude_deg = Vec3::Zero(); ///< (yaw, pitch, roll) as written on disk
    FramePose pose;
    Split split = Split::none;
};

/// Suggested carving volume for a scene.
struct GridHint {
    Vec3 min_corner = Vec3::Zero();
    Vec3 extent = Vec3::Zero();
    Vec3 block_size = Vec3::Zero();

    GridSpec at_scale(double voxel_size) const;
};

struct SceneDataset {
    std::string scene_id;
    std::filesystem::path root; ///< directory the manifest lives in
    CameraModel camera;
    CameraRig rig;
    Vec3 camera_to_body_deg = Vec3::Zero(); ///< (roll, pitch, yaw)
    std::optional<GridHint> grid;
    std::vector<FrameRecord> frames;

    std::vector<const FrameRecord*> frames_in(Split split) const;
    const FrameRecord& frame(int id) const;
};

/// Builds the pose of a frame record from its telemetry fields.
FramePose pose_from_attitude(const Vec3& position, const Vec3& yaw_pitch_roll_deg, const CameraRig& rig);

/// Parses and validates a manifest (or a directory holding manifest.txt).
/// All problems are collected and thrown together as a DatasetError.
SceneDataset load_scene(const std::filesystem::path& manifest);

/// Writes `scene` as a manifest at `path`, with frame paths relative to the
/// manifest's directory.
void write_manifest(const std::filesystem::path& path, const SceneDataset& scene);

/// Keeps every `stride`-th frame and tags the first ceil(fraction * n) of
/// them train, the rest test.
SceneDataset split_dataset(const SceneDataset& scene, double train_fraction = 0.8, int stride = 20);

struct LoadedFrame {
    RgbImage rgb;
    DepthImage depth;
};

LoadedFrame load_frame(const SceneDataset& scene, const FrameRecord& record);

/// Loads and converts every frame with the given tag.
std::vector<FrameObservation> load_observations(const SceneDataset& scene, Split split);

/// Converts a telemetry directory into a manifest. Expected layout:
///   intrinsics.txt   fx fy cx cy width height
///   telemetry.csv    header line, then frame,x,y,z,yaw,pitch,roll (degrees)
///   rgb/NNNNNN.png   depth/NNNNNN.{pfm,png}
/// Writes the manifest to `manifest_out` (default <dir>/manifest.txt) and
/// returns the loaded scene.
SceneDataset import_telemetry(const std::filesystem::path& dir, const std::filesystem::path& manifest_out = {},
                              const std::string& scene_id = {});

} // namespace msvc
