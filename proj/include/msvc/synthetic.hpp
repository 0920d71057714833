#pragma once

// Procedural aerial scenes with exact depth.
//
// The world is a square ground "island" at z = 0 tiled with flat colors,
// plus axis-aligned boxes standing on it. Everything outside the island is
// empty: white in RGB and 0 (no measurement) in depth. Cameras fly a circular
// orbit and look at a fixed target. Depth maps store camera-frame z, the
// same quantity the carving compares against.

#include "msvc/carving.hpp"
#include "msvc/dataset.hpp"
#include "msvc/geometry.hpp"
#include "msvc/image.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace msvc {

struct BoxPrimitive {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    Rgb8 roof;
    Rgb8 wall;
};

struct SyntheticNoise {
    double pose_sigma = 0.0;        ///< meters, added to recorded positions
    double depth_sigma = 0.0;       ///< relative, depth *= 1 + N(0, sigma)
    double brightness_sigma = 0.0;  ///< relative, per-frame RGB gain
};

struct SyntheticSpec {
    int width = 480;
    int height = 270;
    double focal = 600.0;

    int frames = 30;
    double altitude = 50.0;
    double orbit_radius = 15.0;
    double altitude_wobble = 3.0; ///< meters, one sine period per orbit
    Vec3 look_at = Vec3::Zero();

    double half_size = 24.0; ///< island spans [-half_size, half_size]^2
    double tile = 2.0;       ///< ground texture tile edge, meters
    std::vector<Rgb8> ground_palette; ///< empty means synthetic_palette()
    std::vector<BoxPrimitive> boxes;

    SyntheticNoise noise;
    std::uint64_t seed = 1;

    /// Carving volume for this scene.
    GridHint grid{Vec3(-24.0, -24.0, -1.0), Vec3(48.0, 48.0, 12.0), Vec3(12.0, 12.0, 12.0)};
    double reference_voxel_size = 0.5;

    /// The desk-scale scene the tests and acceptance suite use.
    static SyntheticSpec reference();
};

/// Colors used for ground tiles and boxes. Each is the 8-bit color of an HSV
/// bin midpoint, so quantization maps it back to its own bin.
const std::vector<Rgb8>& synthetic_palette();

/// Muted greens, browns and grays, also HSV bin midpoints.
const std::vector<Rgb8>& earth_palette();

struct RayHit {
    double depth = 0.0; ///< camera-frame z; 0 when nothing was hit
    Rgb8 color = kVoidColor;
};

/// Analytic geometry shared by image generation and ground truth.
class SyntheticWorld {
public:
    explicit SyntheticWorld(const SyntheticSpec& spec);

    /// `dir` must be scaled so that its camera-frame z component is 1; the
    /// returned hit distance is then the camera depth.
    RayHit trace(const Vec3& origin, const Vec3& dir) const;

    Rgb8 ground_color(double x, double y) const;
    bool inside_geometry(const Vec3& p) const;

    /// Voxels of `grid` whose cell contains a visible surface.
    std::vector<Index3> surface_voxels(const GridSpec& grid) const;

    void render(const FramePose& pose, const CameraModel& cam, RgbImage& rgb, DepthImage& depth) const;

private:
    SyntheticSpec spec_;
};

struct SyntheticFrame {
    int id = 0;
    FramePose true_pose;
    Vec3 recorded_position = Vec3::Zero();
    Vec3 attitude_deg = Vec3::Zero(); ///< (yaw, pitch, roll)
    RgbImage rgb;
    DepthImage depth;
};

struct SyntheticScene {
    SyntheticSpec spec;
    CameraModel camera;
    std::vector<SyntheticFrame> frames;

    SyntheticWorld world() const { return SyntheticWorld(spec); }
};

/// Deterministic for a given spec (including seed). Throws msvc::Error when
/// a camera would sit inside the geometry.
SyntheticScene generate_synthetic(const SyntheticSpec& spec);

/// Writes rgb/NNNNNN.png, depth/NNNNNN.pfm, manifest.txt and
/// surface_voxels.txt (one "ix iy iz x y z" per line at the reference voxel
/// size) into `dir`. Returns the loaded dataset.
SceneDataset write_synthetic(const SyntheticScene& scene, const std::filesystem::path& dir);

/// Builds an in-memory dataset without touching the disk; frame paths are
/// left empty. Useful together with observations_from().
SceneDataset dataset_from(const SyntheticScene& scene);

/// FrameObservations for the frames of `split` in `ds` (ids must match).
std::vector<FrameObservation> observations_from(const SyntheticScene& scene, const SceneDataset& ds, Split split);

} // namespace msvc
