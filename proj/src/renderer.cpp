#include "msvc/renderer.hpp"

#include "msvc/error.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>

namespace msvc {

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();

// Footprint of one voxel on the image, clipped to the image.
struct Splat {
    int x0, x1, y0, y1; // inclusive
    float depth;
};

bool make_splat(const Projector& projector, const ModelVoxel& voxel, double side, const CameraModel& cam,
                double max_distance, Splat& out) noexcept
{
    const Projection p = projector.project(voxel.center);
    if (!in_bounds(p, cam) || p.depth > max_distance) {
        return false;
    }
    const int cx = static_cast<int>(std::floor(p.x));
    const int cy = static_cast<int>(std::floor(p.y));
    const int h = splat_extent(p.depth, side, cam);
    out.x0 = std::max(cx - h, 0);
    out.x1 = std::min(cx + h, cam.width - 1);
    out.y0 = std::max(cy - h, 0);
    out.y1 = std::min(cy + h, cam.height - 1);
    out.depth = static_cast<float>(p.depth);
    return true;
}

RenderedView empty_view(const FramePose& pose, const CameraModel& cam, double voxel_size)
{
    RenderedView v;
    v.rgb = RgbImage(cam.width, cam.height, kVoidColor);
    v.mask = MaskImage(cam.width, cam.height, 1);
    v.zbuffer = DepthImage(cam.width, cam.height, kInf);
    v.pose = pose;
    v.voxel_size = voxel_size;
    return v;
}

std::uint64_t depth_key(float depth, std::uint32_t index) noexcept
{
    // Positive floats order like their bit patterns.
    return (static_cast<std::uint64_t>(std::bit_cast<std::uint32_t>(depth)) << 32) | index;
}

} // namespace

std::size_t RenderedView::empty_count() const noexcept
{
    return static_cast<std::size_t>(std::count(mask.pixels().begin(), mask.pixels().end(), std::uint8_t{1}));
}

double RenderedView::empty_fraction() const noexcept
{
    return mask.empty() ? 0.0 : static_cast<double>(empty_count()) / static_cast<double>(mask.size());
}

ScaleSet::ScaleSet(std::vector<double> sizes) : sizes_(std::move(sizes))
{
    if (sizes_.empty()) {
        throw Error("scale set is empty");
    }
    for (double s : sizes_) {
        if (!(std::isfinite(s) && s > 0.0)) {
            throw Error("scale set: voxel sizes must be positive");
        }
    }
    std::sort(sizes_.begin(), sizes_.end());
    if (std::adjacent_find(sizes_.begin(), sizes_.end()) != sizes_.end()) {
        throw Error("scale set: duplicate voxel size");
    }
}

int splat_extent(double depth, double side, const CameraModel& cam) noexcept
{
    if (!(depth > 0.0) || !(side > 0.0)) {
        return 0;
    }
    const double half = std::max(cam.fx, cam.fy) * side / (2.0 * depth);
    if (!std::isfinite(half)) {
        return 0;
    }
    return std::max(0, static_cast<int>(std::ceil(half)));
}

RenderedView render_serial(const CarvedModel& model, const FramePose& pose, const CameraModel& cam,
                           double max_distance)
{
    RenderedView view = empty_view(pose, cam, model.voxel_size);
    const Projector projector(pose, cam);
    std::vector<std::uint32_t> owner(view.mask.size(), std::numeric_limits<std::uint32_t>::max());

    for (std::size_t k = 0; k < model.voxels.size(); ++k) {
        Splat s{};
        if (!make_splat(projector, model.voxels[k], model.voxel_size, cam, max_distance, s)) {
            continue;
        }
        const auto index = static_cast<std::uint32_t>(k);
        for (int y = s.y0; y <= s.y1; ++y) {
            for (int x = s.x0; x <= s.x1; ++x) {
                const std::size_t p = view.zbuffer.index(x, y);
                const float z = view.zbuffer[p];
                if (s.depth < z || (s.depth == z && index < owner[p])) {
                    view.zbuffer[p] = s.depth;
                    owner[p] = index;
                }
            }
        }
    }
    for (std::size_t p = 0; p < owner.size(); ++p) {
        if (owner[p] != std::numeric_limits<std::uint32_t>::max()) {
            view.rgb[p] = model.voxels[owner[p]].color;
            view.mask[p] = 0;
        }
    }
    return view;
}

RenderedView render_omp(const CarvedModel& model, const FramePose& pose, const CameraModel& cam,
                        double max_distance)
{
    RenderedView view = empty_view(pose, cam, model.voxel_size);
    const Projector projector(pose, cam);
    constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();
    std::vector<std::atomic<std::uint64_t>> keys(view.mask.size());
    for (auto& k : keys) {
        k.store(kEmpty, std::memory_order_relaxed);
    }

    const auto n = static_cast<std::ptrdiff_t>(model.voxels.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        Splat s{};
        if (!make_splat(projector, model.voxels[static_cast<std::size_t>(k)], model.voxel_size, cam, max_distance, s)) {
            continue;
        }
        const std::uint64_t key = depth_key(s.depth, static_cast<std::uint32_t>(k));
        for (int y = s.y0; y <= s.y1; ++y) {
            for (int x = s.x0; x <= s.x1; ++x) {
                auto& slot = keys[view.zbuffer.index(x, y)];
                std::uint64_t cur = slot.load(std::memory_order_relaxed);
                while (key < cur && !slot.compare_exchange_weak(cur, key, std::memory_order_relaxed)) {
                }
            }
        }
    }

    const auto npix = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < npix; ++p) {
        const std::uint64_t key = keys[static_cast<std::size_t>(p)].load(std::memory_order_relaxed);
        if (key == kEmpty) {
            continue;
        }
        const auto idx = static_cast<std::size_t>(key & 0xffffffffu);
        view.zbuffer[static_cast<std::size_t>(p)] = std::bit_cast<float>(static_cast<std::uint32_t>(key >> 32));
        view.rgb[static_cast<std::size_t>(p)] = model.voxels[idx].color;
        view.mask[static_cast<std::size_t>(p)] = 0;
    }
    return view;
}

RenderedView render(const CarvedModel& model, const FramePose& pose, const CameraModel& cam,
                    const RenderOptions& options)
{
    cam.validate();
    if (model.voxels.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw Error("render: model has too many voxels");
    }
    return options.exec == Exec::serial ? render_serial(model, pose, cam, options.max_distance)
                                        : render_omp(model, pose, cam, options.max_distance);
}

std::size_t BlendResult::empty_count() const noexcept
{
    return static_cast<std::size_t>(std::count(mask.pixels().begin(), mask.pixels().end(), std::uint8_t{1}));
}

double BlendResult::empty_fraction() const noexcept
{
    return mask.empty() ? 0.0 : static_cast<double>(empty_count()) / static_cast<double>(mask.size());
}

BlendResult blend_images(std::span<const RgbImage> images, std::span<const MaskImage> masks)
{
    if (images.empty() || images.size() != masks.size()) {
        throw Error("blend: need one mask per image and at least one image");
    }
    const int w = images[0].width();
    const int h = images[0].height();
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!images[i].same_size(w, h) || !masks[i].same_size(w, h)) {
            throw Error("blend: image dimensions differ between scales");
        }
    }
    BlendResult out;
    out.rgb = RgbImage(w, h, kVoidColor);
    out.mask = MaskImage(w, h, 1);
    for (std::size_t p = 0; p < out.mask.size(); ++p) {
        for (std::size_t s = 0; s < images.size(); ++s) {
            if (!masks[s][p]) {
                out.rgb[p] = images[s][p];
                out.mask[p] = 0;
                break;
            }
        }
    }
    return out;
}

BlendResult blend_scales(std::span<const RenderedView> views)
{
    if (views.empty()) {
        throw Error("blend: no views");
    }
    std::vector<RgbImage> images;
    std::vector<MaskImage> masks;
    for (std::size_t i = 0; i < views.size(); ++i) {
        if (!(views[i].pose == views[0].pose)) {
            throw Error("blend: views were rendered from different poses");
        }
        if (i > 0 && !(views[i].voxel_size > views[i - 1].voxel_size)) {
            throw Error("blend: views must be ordered by increasing voxel size");
        }
        images.push_back(views[i].rgb);
        masks.push_back(views[i].mask);
    }
    return blend_images(images, masks);
}

} // namespace msvc
