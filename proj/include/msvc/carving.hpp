#pragma once

// Depth- and color-consistency voting over a block-partitioned voxel grid.
//
// For every training frame each voxel is projected into the image. Voxels
// that land inside the image within max_distance
//   - gain one seen vote when |depth[pixel] - z_cam| < eps_seen, and
//   - add f1(z_cam) * f2(depth[pixel] - z_cam) to the HSV bin of the pixel.
// After all frames a voxel survives when seen > seen_threshold and its
// dominant normalized bin exceeds eps_hsv; it takes that bin's color.
//
// Blocks are independent, so the result does not depend on how the grid is
// partitioned or in which order blocks are processed. Within a block frames
// are consumed in increasing frame id.

#include "msvc/carved_model.hpp"
#include "msvc/geometry.hpp"
#include "msvc/hsv.hpp"
#include "msvc/image.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace msvc {

enum class Exec : std::uint8_t { serial, parallel };

using Index3 = std::array<int, 3>;

/// Half-open range of global voxel indices covered by one block.
struct BlockRange {
    Index3 begin{};
    Index3 dims{};

    std::size_t voxel_count() const noexcept
    {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }
};

/// Axis-aligned voxel grid. `origin` is the center of the minimum corner
/// voxel; `extent` and `block_size` are in meters.
struct GridSpec {
    Vec3 origin = Vec3::Zero();
    Vec3 extent = Vec3::Zero();
    double voxel_size = 0.0;
    Vec3 block_size = Vec3::Zero();

    /// Grid covering the box [min_corner, min_corner + extent].
    static GridSpec from_bounds(const Vec3& min_corner, const Vec3& extent, double voxel_size,
                                const Vec3& block_size);

    /// 550 x 550 x 80 m at 0.5 m voxels, 50 x 50 x 80 m blocks.
    static GridSpec aerial_default(const Vec3& min_corner);

    /// Throws msvc::Error unless extents are positive multiples of the voxel
    /// size and the block size is a voxel multiple that divides the extent.
    void validate() const;

    Index3 voxel_counts() const;
    Index3 voxels_per_block() const;
    Index3 block_counts() const;
    std::size_t voxel_count() const;
    Vec3 min_corner() const { return origin - Vec3::Constant(voxel_size / 2.0); }

    /// Blocks in x-fastest order.
    std::vector<BlockRange> blocks() const;

    /// Same grid with a different block size.
    GridSpec with_block_size(const Vec3& block) const;

    Vec3 voxel_center(int ix, int iy, int iz) const noexcept
    {
        return {origin.x() + voxel_size * ix, origin.y() + voxel_size * iy, origin.z() + voxel_size * iz};
    }

    /// Global linear index, x fastest.
    std::uint64_t linear_index(int ix, int iy, int iz) const;
};

struct BinEntry {
    BinIndex bin = 0;
    double weight = 0.0;

    friend bool operator==(const BinEntry&, const BinEntry&) = default;
};

/// Sparse per-voxel histogram over the 1500 HSV bins. Entries are kept in
/// order of first insertion.
class BinSet {
public:
    void add(BinIndex bin, double weight)
    {
        for (auto& e : entries_) {
            if (e.bin == bin) {
                e.weight += weight;
                return;
            }
        }
        entries_.push_back({bin, weight});
    }

    std::span<const BinEntry> entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    /// Weight stored for `bin`, zero when absent.
    double weight(BinIndex bin) const noexcept;
    double total() const noexcept;

    /// Bin with the largest weight; ties go to the lowest bin index.
    BinEntry dominant() const noexcept;

    /// Weights divided by their sum, as (bin, fraction) sorted by bin.
    std::vector<BinEntry> normalized() const;

private:
    std::vector<BinEntry> entries_;
};

/// Accumulators for one block.
class VoxelBlock {
public:
    VoxelBlock(const GridSpec& grid, const BlockRange& range);

    const BlockRange& range() const noexcept { return range_; }
    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t voxel_count() const noexcept { return seen_.size(); }

    /// Local index, x fastest.
    std::size_t local_index(int lx, int ly, int lz) const noexcept
    {
        return (static_cast<std::size_t>(lz) * static_cast<std::size_t>(range_.dims[1]) +
                static_cast<std::size_t>(ly)) *
                   static_cast<std::size_t>(range_.dims[0]) +
               static_cast<std::size_t>(lx);
    }

    Index3 global_coords(std::size_t local) const noexcept;
    Vec3 center(std::size_t local) const noexcept;

    std::span<std::uint32_t> seen() noexcept { return seen_; }
    std::span<const std::uint32_t> seen() const noexcept { return seen_; }
    std::span<BinSet> bins() noexcept { return bins_; }
    std::span<const BinSet> bins() const noexcept { return bins_; }

    std::uint32_t frames_processed() const noexcept { return frames_; }
    void mark_frame_processed() noexcept { ++frames_; }

private:
    GridSpec grid_;
    BlockRange range_;
    std::vector<std::uint32_t> seen_;
    std::vector<BinSet> bins_;
    std::uint32_t frames_ = 0;
};

/// One training frame reduced to what the kernels read: per-pixel HSV bin
/// and depth in meters. Immutable and safe to share across workers.
struct FrameObservation {
    int id = 0;
    FramePose pose;
    Image<BinIndex> bins;
    DepthImage depth;
};

/// Converts RGB to per-pixel bins. Throws when either image does not match
/// the camera size.
FrameObservation make_observation(int id, const FramePose& pose, const RgbImage& rgb, DepthImage depth,
                                  const CameraModel& cam);

/// Distance weight exp(-ln(alpha) / max_distance * distance).
double f1(double distance, double alpha, double max_distance = 250.0) noexcept;

/// Occlusion weight exp(-diff^2 / (2 sigma^2)).
double f2(double depth_diff, double sigma) noexcept;

/// A depth sample counts as a measurement when finite and positive.
inline bool valid_depth(float d) noexcept
{
    return d > 0.0f && d <= 3.0e38f;
}

/// In-bounds test plus |depth[pixel] - z_cam| < eps_seen. Missing depth
/// (zero or non-finite) counts as not seen.
bool depth_consistent(const Projection& p, const DepthImage& depth, const CameraModel& cam,
                      const CarveParams& params) noexcept;

struct StageTimings {
    double projection_s = 0.0;
    double colorization_s = 0.0;

    StageTimings& operator+=(const StageTimings& o) noexcept
    {
        projection_s += o.projection_s;
        colorization_s += o.colorization_s;
        return *this;
    }
};

/// Straight single-pass loop over the block. Kept as the reference the
/// parallel kernel is tested against.
void accumulate_frame_serial(VoxelBlock& block, const FrameObservation& frame, const CameraModel& cam,
                             const CarveParams& params);

/// OpenMP kernel: a projection pass followed by a colorization pass, both
/// parallel over voxels. Produces bit-identical accumulators to the serial
/// path.
StageTimings accumulate_frame_omp(VoxelBlock& block, const FrameObservation& frame, const CameraModel& cam,
                                  const CarveParams& params);

/// Dispatches to one of the kernels above after validating the frame.
StageTimings accumulate_frame(VoxelBlock& block, const FrameObservation& frame, const CameraModel& cam,
                              const CarveParams& params, Exec exec = Exec::parallel);

/// Surviving voxel with its global linear index.
struct SurvivingVoxel {
    std::uint64_t key = 0;
    Vec3 center;
    Rgb8 color;
    BinIndex bin = 0;
};

/// Applies the seen and color thresholds to an accumulated block.
std::vector<SurvivingVoxel> finalize(const VoxelBlock& block, const CarveParams& params);

struct CarveOptions {
    Exec exec = Exec::parallel;
    /// Optional permutation of grid.blocks(); empty means natural order.
    std::vector<std::size_t> block_order;
    std::string scene_id;
};

struct FrameTiming {
    int frame_id = 0;
    StageTimings stages;
};

struct CarveStats {
    StageTimings stages;
    std::vector<FrameTiming> per_frame; ///< summed over blocks, in frame id order
    double total_s = 0.0;
    std::size_t blocks = 0;
    std::size_t voxels = 0;
    std::size_t survivors = 0;
};

struct CarveResult {
    CarvedModel model;
    CarveStats stats;
};

/// Accumulates all frames into one block of the grid. When `per_frame` is
/// non-empty it must have one slot per entry of `frames`.
VoxelBlock carve_block(const GridSpec& grid, const BlockRange& range, std::span<const FrameObservation> frames,
                       const CameraModel& cam, const CarveParams& params, Exec exec = Exec::parallel,
                       StageTimings* timings = nullptr, std::span<StageTimings> per_frame = {});

/// Carves every block and merges the survivors. Throws msvc::Error when no
/// frames are given or the grid and parameters disagree.
CarveResult carve_scene(std::span<const FrameObservation> frames, const CameraModel& cam, const GridSpec& grid,
                        const CarveParams& params, const CarveOptions& options = {});

} // namespace msvc
