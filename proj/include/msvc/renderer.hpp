#pragma once

// Point-splat renderer for carved models.
//
// Each voxel center is projected; when it lands inside the image it writes a
// square of side 2*h+1 pixels centered on its pixel, h = splat_extent(...).
// A pixel keeps the voxel with the smallest (float) camera depth; exact depth
// ties go to the voxel that comes first in the model. Pixels nobody writes are
// empty, have +inf depth and show the void color.

#include "msvc/carved_model.hpp"
#include "msvc/carving.hpp"
#include "msvc/geometry.hpp"
#include "msvc/image.hpp"

#include <span>
#include <vector>

namespace msvc {

struct RenderedView {
    RgbImage rgb;
    MaskImage mask;     ///< 1 = empty
    DepthImage zbuffer; ///< camera depth in meters, +inf where empty
    FramePose pose;
    double voxel_size = 0.0;

    std::size_t empty_count() const noexcept;
    double empty_fraction() const noexcept;
};

/// Distinct positive voxel sizes, kept sorted finest first.
class ScaleSet {
public:
    explicit ScaleSet(std::vector<double> sizes);

    std::span<const double> sizes() const noexcept { return sizes_; }
    std::size_t size() const noexcept { return sizes_.size(); }
    double operator[](std::size_t i) const noexcept { return sizes_[i]; }

private:
    std::vector<double> sizes_;
};

/// Half-width in pixels of the splat for a voxel of edge `side` at depth
/// `depth`: ceil(max(fx, fy) * side / (2 * depth)), never negative.
int splat_extent(double depth, double side, const CameraModel& cam) noexcept;

struct RenderOptions {
    double max_distance = 250.0;
    Exec exec = Exec::parallel;
};

/// Sequential reference splatter.
RenderedView render_serial(const CarvedModel& model, const FramePose& pose, const CameraModel& cam,
                           double max_distance = 250.0);

/// OpenMP splatter over voxels. Resolves depth with an atomic min on a
/// (depth, voxel index) key, so the output is bit-identical to the serial
/// path.
RenderedView render_omp(const CarvedModel& model, const FramePose& pose, const CameraModel& cam,
                        double max_distance = 250.0);

RenderedView render(const CarvedModel& model, const FramePose& pose, const CameraModel& cam,
                    const RenderOptions& options = {});

struct BlendResult {
    RgbImage rgb;
    MaskImage mask; ///< 1 = empty at every scale
    std::size_t empty_count() const noexcept;
    double empty_fraction() const noexcept;
};

/// Composites views ordered finest scale first: each output pixel comes from
/// the first view where it is not empty. Throws when sizes or poses differ,
/// or when the views are not in increasing voxel size.
BlendResult blend_scales(std::span<const RenderedView> views);

/// Same compositing on plain images, for views loaded back from disk.
BlendResult blend_images(std::span<const RgbImage> images, std::span<const MaskImage> masks);

} // namespace msvc
