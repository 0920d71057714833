#include "msvc/carving.hpp"

#include "msvc/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace msvc {

namespace {

int whole_multiple(double length, double unit, const char* what)
{
    const double ratio = length / unit;
    const double n = std::round(ratio);
    if (!(n >= 1.0) || std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
        throw Error(std::string("grid: ") + what + " (" + std::to_string(length) +
                    " m) is not a positive multiple of " + std::to_string(unit) + " m");
    }
    return static_cast<int>(n);
}

} // namespace

CarveParams CarveParams::defaults_for(double voxel_size)
{
    CarveParams p;
    p.voxel_size = voxel_size;
    p.eps_seen = 2.0 * voxel_size;
    return p;
}

void CarveParams::validate() const
{
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(voxel_size)) {
        throw Error("carve params: voxel_size must be positive");
    }
    if (!positive(eps_seen)) {
        throw Error("carve params: eps_seen must be positive");
    }
    if (seen_threshold < 1) {
        throw Error("carve params: seen_threshold must be at least 1");
    }
    if (!(std::isfinite(alpha) && alpha >= 1.0)) {
        throw Error("carve params: alpha must be >= 1 so that f1 decreases with distance");
    }
    if (!positive(sigma)) {
        throw Error("carve params: sigma must be positive");
    }
    if (!(eps_hsv > 0.0 && eps_hsv <= 1.0)) {
        throw Error("carve params: eps_hsv must lie in (0, 1]");
    }
    if (!positive(max_distance)) {
        throw Error("carve params: max_distance must be positive");
    }
}

// --- GridSpec -------------------------------------------------------------

GridSpec GridSpec::from_bounds(const Vec3& min_corner, const Vec3& extent, double voxel_size, const Vec3& block_size)
{
    GridSpec g;
    g.origin = min_corner + Vec3::Constant(voxel_size / 2.0);
    g.extent = extent;
    g.voxel_size = voxel_size;
    g.block_size = block_size;
    g.validate();
    return g;
}

GridSpec GridSpec::aerial_default(const Vec3& min_corner)
{
    return from_bounds(min_corner, Vec3(550.0, 550.0, 80.0), 0.5, Vec3(50.0, 50.0, 80.0));
}

void GridSpec::validate() const
{
    if (!(std::isfinite(voxel_size) && voxel_size > 0.0)) {
        throw Error("grid: voxel size must be positive");
    }
    if (!origin.allFinite()) {
        throw Error("grid: origin is not finite");
    }
    (void)voxel_counts();
    (void)block_counts();
}

Index3 GridSpec::voxel_counts() const
{
    static constexpr const char* names[] = {"extent x", "extent y", "extent z"};
    Index3 n{};
    for (int a = 0; a < 3; ++a) {
        n[static_cast<std::size_t>(a)] = whole_multiple(extent[a], voxel_size, names[a]);
    }
    return n;
}

Index3 GridSpec::voxels_per_block() const
{
    static constexpr const char* names[] = {"block x", "block y", "block z"};
    Index3 n{};
    for (int a = 0; a < 3; ++a) {
        n[static_cast<std::size_t>(a)] = whole_multiple(block_size[a], voxel_size, names[a]);
    }
    return n;
}

Index3 GridSpec::block_counts() const
{
    const Index3 total = voxel_counts();
    const Index3 per = voxels_per_block();
    Index3 n{};
    for (std::size_t a = 0; a < 3; ++a) {
        if (total[a] % per[a] != 0) {
            throw Error("grid: block size does not divide the grid extent along axis " + std::to_string(a));
        }
        n[a] = total[a] / per[a];
    }
    return n;
}

std::size_t GridSpec::voxel_count() const
{
    const Index3 n = voxel_counts();
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(n[2]);
}

std::vector<BlockRange> GridSpec::blocks() const
{
    const Index3 counts = block_counts();
    const Index3 per = voxels_per_block();
    std::vector<BlockRange> out;
    out.reserve(static_cast<std::size_t>(counts[0] * counts[1] * counts[2]));
    for (int bz = 0; bz < counts[2]; ++bz) {
        for (int by = 0; by < counts[1]; ++by) {
            for (int bx = 0; bx < counts[0]; ++bx) {
                out.push_back({{bx * per[0], by * per[1], bz * per[2]}, per});
            }
        }
    }
    return out;
}

GridSpec GridSpec::with_block_size(const Vec3& block) const
{
    GridSpec g = *this;
    g.block_size = block;
    return g;
}

std::uint64_t GridSpec::linear_index(int ix, int iy, int iz) const
{
    const Index3 n = voxel_counts();
    return (static_cast<std::uint64_t>(iz) * static_cast<std::uint64_t>(n[1]) + static_cast<std::uint64_t>(iy)) *
               static_cast<std::uint64_t>(n[0]) +
           static_cast<std::uint64_t>(ix);
}

// --- BinSet ---------------------------------------------------------------

double BinSet::weight(BinIndex bin) const noexcept
{
    for (const auto& e : entries_) {
        if (e.bin == bin) {
            return e.weight;
        }
    }
    return 0.0;
}

double BinSet::total() const noexcept
{
    double sum = 0.0;
    for (const auto& e : entries_) {
        sum += e.weight;
    }
    return sum;
}

BinEntry BinSet::dominant() const noexcept
{
    BinEntry best{0, -1.0};
    for (const auto& e : entries_) {
        if (e.weight > best.weight || (e.weight == best.weight && e.bin < best.bin)) {
            best = e;
        }
    }
    return best;
}

std::vector<BinEntry> BinSet::normalized() const
{
    std::vector<BinEntry> out(entries_.begin(), entries_.end());
    const double sum = total();
    if (sum > 0.0) {
        for (auto& e : out) {
            e.weight /= sum;
        }
    }
    std::sort(out.begin(), out.end(), [](const BinEntry& a, const BinEntry& b) { return a.bin < b.bin; });
    return out;
}

// --- VoxelBlock -----------------------------------------------------------

VoxelBlock::VoxelBlock(const GridSpec& grid, const BlockRange& range)
    : grid_(grid), range_(range), seen_(range.voxel_count(), 0), bins_(range.voxel_count())
{
}

Index3 VoxelBlock::global_coords(std::size_t local) const noexcept
{
    const auto nx = static_cast<std::size_t>(range_.dims[0]);
    const auto ny = static_cast<std::size_t>(range_.dims[1]);
    const int lx = static_cast<int>(local % nx);
    const int ly = static_cast<int>((local / nx) % ny);
    const int lz = static_cast<int>(local / (nx * ny));
    return {range_.begin[0] + lx, range_.begin[1] + ly, range_.begin[2] + lz};
}

Vec3 VoxelBlock::center(std::size_t local) const noexcept
{
    const Index3 g = global_coords(local);
    return grid_.voxel_center(g[0], g[1], g[2]);
}

// --- frames and weights ---------------------------------------------------

FrameObservation make_observation(int id, const FramePose& pose, const RgbImage& rgb, DepthImage depth,
                                  const CameraModel& cam)
{
    if (!rgb.same_size(cam.width, cam.height)) {
        throw Error("frame " + std::to_string(id) + ": RGB image is " + std::to_string(rgb.width()) + "x" +
                    std::to_string(rgb.height()) + ", camera expects " + std::to_string(cam.width) + "x" +
                    std::to_string(cam.height));
    }
    if (!depth.same_size(cam.width, cam.height)) {
        throw Error("frame " + std::to_string(id) + ": depth image is " + std::to_string(depth.width()) + "x" +
                    std::to_string(depth.height()) + ", camera expects " + std::to_string(cam.width) + "x" +
                    std::to_string(cam.height));
    }
    FrameObservation obs;
    obs.id = id;
    obs.pose = pose;
    obs.bins = Image<BinIndex>(rgb.width(), rgb.height());
    for (std::size_t i = 0; i < rgb.size(); ++i) {
        obs.bins[i] = rgb_to_bin(rgb[i]);
    }
    obs.depth = std::move(depth);
    return obs;
}

double f1(double distance, double alpha, double max_distance) noexcept
{
    return std::exp(-std::log(alpha) / max_distance * distance);
}

double f2(double depth_diff, double sigma) noexcept
{
    return std::exp(-(depth_diff * depth_diff) / (2.0 * sigma * sigma));
}

bool depth_consistent(const Projection& p, const DepthImage& depth, const CameraModel& cam,
                      const CarveParams& params) noexcept
{
    if (!in_bounds(p, cam)) {
        return false;
    }
    const float d = depth(static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y)));
    if (!valid_depth(d)) {
        return false;
    }
    return std::abs(static_cast<double>(d) - p.depth) < params.eps_seen;
}

StageTimings accumulate_frame(VoxelBlock& block, const FrameObservation& frame, const CameraModel& cam,
                              const CarveParams& params, Exec exec)
{
    if (!frame.bins.same_size(cam.width, cam.height) || !frame.depth.same_size(cam.width, cam.height)) {
        throw Error("frame " + std::to_string(frame.id) + ": image size does not match the camera");
    }
    if (!frame.pose.position().allFinite() || !frame.pose.rotation().allFinite()) {
        throw Error("frame " + std::to_string(frame.id) + ": non-finite pose");
    }
    if (exec == Exec::serial) {
        const auto t0 = std::chrono::steady_clock::now();
        accumulate_frame_serial(block, frame, cam, params);
        StageTimings t;
        t.projection_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return t;
    }
    return accumulate_frame_omp(block, frame, cam, params);
}

// --- finalize and scene ---------------------------------------------------

std::vector<SurvivingVoxel> finalize(const VoxelBlock& block, const CarveParams& params)
{
    std::vector<SurvivingVoxel> out;
    const auto seen = block.seen();
    const auto bins = block.bins();
    const auto threshold = static_cast<std::uint32_t>(params.seen_threshold);
    for (std::size_t i = 0; i < block.voxel_count(); ++i) {
        if (seen[i] <= threshold) {
            continue;
        }
        const double total = bins[i].total();
        if (!(total > 0.0)) {
            continue;
        }
        const BinEntry best = bins[i].dominant();
        if (!(best.weight / total > params.eps_hsv)) {
            continue;
        }
        const Index3 g = block.global_coords(i);
        out.push_back({block.grid().linear_index(g[0], g[1], g[2]), block.grid().voxel_center(g[0], g[1], g[2]),
                       bin_to_rgb(best.bin), best.bin});
    }
    return out;
}

namespace {

std::vector<std::size_t> frame_order(std::span<const FrameObservation> frames)
{
    std::vector<std::size_t> order(frames.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frames[a].id < frames[b].id; });
    return order;
}

} // namespace

VoxelBlock carve_block(const GridSpec& grid, const BlockRange& range, std::span<const FrameObservation> frames,
                       const CameraModel& cam, const CarveParams& params, Exec exec, StageTimings* timings,
                       std::span<StageTimings> per_frame)
{
    if (!per_frame.empty() && per_frame.size() != frames.size()) {
        throw Error("carve: per-frame timing slots do not match the frame count");
    }
    VoxelBlock block(grid, range);
    for (std::size_t idx : frame_order(frames)) {
        const StageTimings t = accumulate_frame(block, frames[idx], cam, params, exec);
        block.mark_frame_processed();
        if (timings) {
            *timings += t;
        }
        if (!per_frame.empty()) {
            per_frame[idx] += t;
        }
    }
    return block;
}

CarveResult carve_scene(std::span<const FrameObservation> frames, const CameraModel& cam, const GridSpec& grid,
                        const CarveParams& params, const CarveOptions& options)
{
    if (frames.empty()) {
        throw Error("carve: no training frames");
    }
    cam.validate();
    params.validate();
    grid.validate();
    if (std::abs(params.voxel_size - grid.voxel_size) > 1e-12 * grid.voxel_size) {
        throw Error("carve: parameter voxel size " + std::to_string(params.voxel_size) +
                    " does not match grid voxel size " + std::to_string(grid.voxel_size));
    }
    const std::vector<BlockRange> blocks = grid.blocks();
    std::vector<std::size_t> order = options.block_order;
    if (order.empty()) {
        order.resize(blocks.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
    } else {
        std::vector<std::size_t> check = order;
        std::sort(check.begin(), check.end());
        for (std::size_t i = 0; i < check.size(); ++i) {
            if (check.size() != blocks.size() || check[i] != i) {
                throw Error("carve: block order is not a permutation of the grid blocks");
            }
        }
    }

    const auto t0 = std::chrono::steady_clock::now();
    CarveResult result;
    std::vector<SurvivingVoxel> survivors;
    std::vector<StageTimings> per_frame(frames.size());
    for (std::size_t b : order) {
        const VoxelBlock block =
            carve_block(grid, blocks[b], frames, cam, params, options.exec, &result.stats.stages, per_frame);
        std::vector<SurvivingVoxel> part = finalize(block, params);
        survivors.insert(survivors.end(), part.begin(), part.end());
        result.stats.voxels += block.voxel_count();
    }
    std::sort(survivors.begin(), survivors.end(),
              [](const SurvivingVoxel& a, const SurvivingVoxel& b) { return a.key < b.key; });

    result.model.voxel_size = grid.voxel_size;
    result.model.scene_id = options.scene_id;
    result.model.params = params;
    result.model.voxels.reserve(survivors.size());
    for (const auto& s : survivors) {
        result.model.voxels.push_back({s.center, s.color});
    }
    for (std::size_t idx : frame_order(frames)) {
        result.stats.per_frame.push_back({frames[idx].id, per_frame[idx]});
    }
    result.stats.blocks = blocks.size();
    result.stats.survivors = survivors.size();
    result.stats.total_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace msvc
