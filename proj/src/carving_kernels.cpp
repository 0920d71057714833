#include "msvc/carving.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace msvc {

namespace {

struct PixelHit {
    std::int32_t pixel = -1; // -1: no contribution from this frame
    double depth = 0.0;      // camera-frame depth of the voxel
    double diff = 0.0;       // measured depth minus voxel depth
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

void accumulate_frame_serial(VoxelBlock& block, const FrameObservation& frame, const CameraModel& cam,
                             const CarveParams& params)
{
    const Projector projector(frame.pose, cam);
    const BlockRange& range = block.range();
    const GridSpec& grid = block.grid();
    auto seen = block.seen();
    auto bins = block.bins();

    for (int lz = 0; lz < range.dims[2]; ++lz) {
        for (int ly = 0; ly < range.dims[1]; ++ly) {
            for (int lx = 0; lx < range.dims[0]; ++lx) {
                const std::size_t i = block.local_index(lx, ly, lz);
                const Vec3 c = grid.voxel_center(range.begin[0] + lx, range.begin[1] + ly, range.begin[2] + lz);
                const Projection p = projector.project(c);
                if (!in_bounds(p, cam) || p.depth > params.max_distance) {
                    continue;
                }
                const int px = static_cast<int>(std::floor(p.x));
                const int py = static_cast<int>(std::floor(p.y));
                const float measured = frame.depth(px, py);
                if (!valid_depth(measured)) {
                    continue;
                }
                const double diff = static_cast<double>(measured) - p.depth;
                if (std::abs(diff) < params.eps_seen) {
                    ++seen[i];
                }
                const double w = f1(p.depth, params.alpha, params.max_distance) * f2(diff, params.sigma);
                bins[i].add(frame.bins(px, py), w);
            }
        }
    }
}

StageTimings accumulate_frame_omp(VoxelBlock& block, const FrameObservation& frame, const CameraModel& cam,
                                  const CarveParams& params)
{
    const Projector projector(frame.pose, cam);
    const BlockRange& range = block.range();
    const GridSpec& grid = block.grid();
    auto seen = block.seen();
    auto bins = block.bins();

    // Scratch is per calling thread; bind it to a span before entering the
    // parallel regions so every worker sees the caller's buffer.
    static thread_local std::vector<PixelHit> scratch;
    scratch.assign(block.voxel_count(), PixelHit{});
    const std::span<PixelHit> hits = scratch;

    const int nx = range.dims[0];
    const int ny = range.dims[1];
    const int nz = range.dims[2];
    const int width = cam.width;
    const std::span<const float> depth = frame.depth.pixels();
    StageTimings timings;

    // Projection and depth voting.
    auto t0 = std::chrono::steady_clock::now();
#pragma omp parallel for collapse(2) schedule(static)
    for (int lz = 0; lz < nz; ++lz) {
        for (int ly = 0; ly < ny; ++ly) {
            std::size_t i = block.local_index(0, ly, lz);
            for (int lx = 0; lx < nx; ++lx, ++i) {
                const Vec3 c = grid.voxel_center(range.begin[0] + lx, range.begin[1] + ly, range.begin[2] + lz);
                const Projection p = projector.project(c);
                if (!in_bounds(p, cam) || p.depth > params.max_distance) {
                    continue;
                }
                const auto pixel = static_cast<std::int32_t>(static_cast<int>(std::floor(p.y)) * width +
                                                             static_cast<int>(std::floor(p.x)));
                const float measured = depth[static_cast<std::size_t>(pixel)];
                if (!valid_depth(measured)) {
                    continue;
                }
                const double diff = static_cast<double>(measured) - p.depth;
                if (std::abs(diff) < params.eps_seen) {
                    ++seen[i];
                }
                hits[i] = {pixel, p.depth, diff};
            }
        }
    }
    timings.projection_s = seconds_since(t0);

    // Colorization.
    t0 = std::chrono::steady_clock::now();
    const std::span<const BinIndex> pixel_bins = frame.bins.pixels();
    const auto n = static_cast<std::ptrdiff_t>(hits.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const PixelHit& h = hits[static_cast<std::size_t>(i)];
        if (h.pixel < 0) {
            continue;
        }
        const double w = f1(h.depth, params.alpha, params.max_distance) * f2(h.diff, params.sigma);
        bins[static_cast<std::size_t>(i)].add(pixel_bins[static_cast<std::size_t>(h.pixel)], w);
    }
    timings.colorization_s = seconds_since(t0);
    return timings;
}

} // namespace msvc
