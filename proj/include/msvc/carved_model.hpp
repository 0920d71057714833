#pragma once

#include "msvc/geometry.hpp"
#include "msvc/image.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace msvc {

/// Thresholds and weights for one carving pass.
struct CarveParams {
    double voxel_size = 0.5;
    double eps_seen = 1.0;     ///< meters; depth-consistency tolerance
    int seen_threshold = 3;    ///< a voxel needs strictly more votes than this
    double alpha = 10.0;       ///< distance weight falls to 1/alpha at max_distance
    double sigma = 5.0;        ///< meters; width of the occlusion weight
    double eps_hsv = 0.3;      ///< dominant normalized bin must exceed this
    double max_distance = 250.0;

    /// Defaults for a given voxel size; eps_seen scales as 2 * voxel_size.
    static CarveParams defaults_for(double voxel_size);

    void validate() const;

    friend bool operator==(const CarveParams&, const CarveParams&) = default;
};

struct ModelVoxel {
    Vec3 center;
    Rgb8 color;

    friend bool operator==(const ModelVoxel&, const ModelVoxel&) = default;
};

/// Surviving voxels at one scale, ordered by their global grid index.
/// That order is the serialization order the renderer uses to break depth
/// ties.
struct CarvedModel {
    double voxel_size = 0.0;
    std::vector<ModelVoxel> voxels;
    std::string scene_id;
    std::optional<CarveParams> params;
};

/// Binary container, all little-endian:
///   "MSVC" | u32 version (=1) | f64 voxel_size | u64 count |
///   count x (f64 x, f64 y, f64 z, u8 r, u8 g, u8 b)
void write_model(const std::filesystem::path& path, const CarvedModel& model);
CarvedModel read_model(const std::filesystem::path& path);

/// Debug export, one voxel per line: "x y z r g b".
void write_model_text(const std::filesystem::path& path, const CarvedModel& model);

inline constexpr std::uint32_t kModelFormatVersion = 1;

} // namespace msvc
