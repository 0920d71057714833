#include "msvc/synthetic.hpp"

#include "msvc/error.hpp"
#include "msvc/hsv.hpp"
#include "msvc/image_io.hpp"
#include "msvc/pipeline.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>

namespace msvc {

namespace fs = std::filesystem;

const std::vector<Rgb8>& synthetic_palette()
{
    static const std::vector<Rgb8> palette = [] {
        // (sat bin, val bin) pairs away from the dark, desaturated corner
        // where 8-bit rounding moves colors across bin boundaries.
        constexpr int sv[][2] = {{6, 7}, {4, 8}, {8, 5}, {5, 6}, {7, 8}};
        std::vector<Rgb8> out;
        for (int h = 0; h < kHueBins; ++h) {
            const auto& [s, v] = sv[h % 5];
            const int bin = h * 100 + s * 10 + v;
            const Rgb8 c = bin_to_rgb(bin);
            if (rgb_to_bin(c) == bin) {
                out.push_back(c);
            }
        }
        return out;
    }();
    return palette;
}

const std::vector<Rgb8>& earth_palette()
{
    static const std::vector<Rgb8> palette = [] {
        constexpr int bins[] = {147, 258, 236, 357, 346, 467, 425, 568, 136, 226, 315, 448, 203, 1015, 1026};
        std::vector<Rgb8> out;
        for (int bin : bins) {
            const Rgb8 c = bin_to_rgb(bin);
            if (rgb_to_bin(c) == bin) {
                out.push_back(c);
            }
        }
        return out;
    }();
    return palette;
}

SyntheticSpec SyntheticSpec::reference()
{
    const auto& pal = synthetic_palette();
    auto color = [&](std::size_t i) { return pal[i % pal.size()]; };
    SyntheticSpec spec;
    spec.tile = 4.0;
    spec.ground_palette = earth_palette();
    spec.boxes = {
        {Vec3(-10.0, -8.0, 0.0), Vec3(-4.0, -2.0, 8.0), color(2), color(9)},
        {Vec3(3.0, 4.0, 0.0), Vec3(9.0, 12.0, 5.0), color(5), color(12)},
        {Vec3(-6.0, 8.0, 0.0), Vec3(-2.0, 14.0, 3.0), color(7), color(1)},
        {Vec3(8.0, -12.0, 0.0), Vec3(14.0, -6.0, 6.5), color(11), color(4)},
        {Vec3(-17.0, -16.0, 0.0), Vec3(-12.0, -10.0, 4.0), color(13), color(6)},
    };
    return spec;
}

SyntheticWorld::SyntheticWorld(const SyntheticSpec& spec) : spec_(spec) {}

Rgb8 SyntheticWorld::ground_color(double x, double y) const
{
    const auto& pal = spec_.ground_palette.empty() ? synthetic_palette() : spec_.ground_palette;
    const auto tx = static_cast<std::int64_t>(std::floor(x / spec_.tile));
    const auto ty = static_cast<std::int64_t>(std::floor(y / spec_.tile));
    const std::uint64_t h = static_cast<std::uint64_t>(tx * 73856093) ^ static_cast<std::uint64_t>(ty * 19349663);
    return pal[(h * 0x9E3779B97F4A7C15ull >> 40) % pal.size()];
}

bool SyntheticWorld::inside_geometry(const Vec3& p) const
{
    if (p.z() <= 0.0 && std::abs(p.x()) <= spec_.half_size && std::abs(p.y()) <= spec_.half_size) {
        return true;
    }
    for (const auto& b : spec_.boxes) {
        if ((p.array() >= b.min.array()).all() && (p.array() <= b.max.array()).all()) {
            return true;
        }
    }
    return false;
}

RayHit SyntheticWorld::trace(const Vec3& o, const Vec3& d) const
{
    RayHit best;
    double best_t = std::numeric_limits<double>::infinity();

    if (d.z() < 0.0 && o.z() > 0.0) {
        const double t = -o.z() / d.z();
        const Vec3 p = o + t * d;
        if (std::abs(p.x()) <= spec_.half_size && std::abs(p.y()) <= spec_.half_size) {
            best_t = t;
            best.color = ground_color(p.x(), p.y());
        }
    }
    for (const auto& b : spec_.boxes) {
        double t_enter = -std::numeric_limits<double>::infinity();
        double t_exit = std::numeric_limits<double>::infinity();
        int enter_axis = -1;
        bool miss = false;
        for (int a = 0; a < 3 && !miss; ++a) {
            if (d[a] == 0.0) {
                miss = o[a] < b.min[a] || o[a] > b.max[a];
                continue;
            }
            double t0 = (b.min[a] - o[a]) / d[a];
            double t1 = (b.max[a] - o[a]) / d[a];
            if (t0 > t1) {
                std::swap(t0, t1);
            }
            if (t0 > t_enter) {
                t_enter = t0;
                enter_axis = a;
            }
            t_exit = std::min(t_exit, t1);
        }
        if (miss || t_enter > t_exit || !(t_enter > 0.0) || t_enter >= best_t) {
            continue;
        }
        best_t = t_enter;
        best.color = enter_axis == 2 ? b.roof : b.wall;
    }
    if (std::isfinite(best_t)) {
        best.depth = best_t;
    } else {
        best.color = kVoidColor;
    }
    return best;
}

void SyntheticWorld::render(const FramePose& pose, const CameraModel& cam, RgbImage& rgb, DepthImage& depth) const
{
    rgb = RgbImage(cam.width, cam.height, kVoidColor);
    depth = DepthImage(cam.width, cam.height, 0.0f);
    const Mat3& r = pose.rotation();
    const Vec3& o = pose.position();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const Vec3 dc((x + 0.5 - cam.cx) / cam.fx, (y + 0.5 - cam.cy) / cam.fy, 1.0);
            const RayHit hit = trace(o, r * dc);
            rgb(x, y) = hit.color;
            depth(x, y) = static_cast<float>(hit.depth);
        }
    }
}

std::vector<Index3> SyntheticWorld::surface_voxels(const GridSpec& grid) const
{
    const Index3 n = grid.voxel_counts();
    const double h = grid.voxel_size / 2.0;
    // Half-open cell [c - h, c + h) contains coordinate v.
    auto holds = [h](double c, double v) { return c - h <= v && v < c + h; };
    auto within = [](double v, double lo, double hi) { return v >= lo && v <= hi; };

    std::vector<Index3> out;
    for (int iz = 0; iz < n[2]; ++iz) {
        for (int iy = 0; iy < n[1]; ++iy) {
            for (int ix = 0; ix < n[0]; ++ix) {
                const Vec3 c = grid.voxel_center(ix, iy, iz);
                bool surface = false;
                if (holds(c.z(), 0.0) && std::abs(c.x()) <= spec_.half_size && std::abs(c.y()) <= spec_.half_size) {
                    surface = std::none_of(spec_.boxes.begin(), spec_.boxes.end(), [&](const BoxPrimitive& b) {
                        return c.x() > b.min.x() && c.x() < b.max.x() && c.y() > b.min.y() && c.y() < b.max.y();
                    });
                }
                for (const auto& b : spec_.boxes) {
                    if (surface) {
                        break;
                    }
                    const bool in_x = within(c.x(), b.min.x(), b.max.x());
                    const bool in_y = within(c.y(), b.min.y(), b.max.y());
                    const bool in_z = within(c.z(), std::max(0.0, b.min.z()), b.max.z());
                    surface = (holds(c.z(), b.max.z()) && in_x && in_y) ||
                              ((holds(c.x(), b.min.x()) || holds(c.x(), b.max.x())) && in_y && in_z) ||
                              ((holds(c.y(), b.min.y()) || holds(c.y(), b.max.y())) && in_x && in_z);
                }
                if (surface) {
                    out.push_back({ix, iy, iz});
                }
            }
        }
    }
    return out;
}

namespace {

Mat3 look_at_rotation(const Vec3& eye, const Vec3& target)
{
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(Vec3::UnitZ());
    if (right.norm() < 1e-9) {
        right = Vec3::UnitX();
    }
    right.normalize();
    const Vec3 down = forward.cross(right);
    Mat3 r;
    r.col(0) = right;
    r.col(1) = down;
    r.col(2) = forward;
    return r;
}

} // namespace

SyntheticScene generate_synthetic(const SyntheticSpec& spec)
{
    if (spec.frames < 1 || spec.width < 1 || spec.height < 1 || !(spec.focal > 0.0)) {
        throw Error("synthetic: invalid image or trajectory size");
    }
    SyntheticScene scene;
    scene.spec = spec;
    scene.camera = {spec.focal, spec.focal, spec.width / 2.0, spec.height / 2.0, spec.width, spec.height};
    scene.camera.validate();

    const SyntheticWorld world(spec);
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    for (int k = 0; k < spec.frames; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / spec.frames;
        const Vec3 eye = spec.look_at + Vec3(spec.orbit_radius * std::cos(theta), spec.orbit_radius * std::sin(theta),
                                             0.0) +
                         Vec3(0.0, 0.0, spec.altitude + spec.altitude_wobble * std::sin(theta) - spec.look_at.z());
        if (world.inside_geometry(eye)) {
            throw Error("synthetic: camera " + std::to_string(k) + " is inside the scene geometry");
        }
        const Vec3 euler = rotation_to_euler_zyx(look_at_rotation(eye, spec.look_at));

        SyntheticFrame f;
        f.id = k;
        f.attitude_deg = Vec3(rad_to_deg(euler[2]), rad_to_deg(euler[1]), rad_to_deg(euler[0]));
        // Round-trip through degrees so the rendering pose equals the pose a
        // reader of the manifest reconstructs.
        f.true_pose = pose_from_attitude(eye, f.attitude_deg, CameraRig{});
        world.render(f.true_pose, scene.camera, f.rgb, f.depth);

        const double gain = 1.0 + spec.noise.brightness_sigma * normal(rng);
        f.recorded_position = eye;
        for (int a = 0; a < 3; ++a) {
            f.recorded_position[a] += spec.noise.pose_sigma * normal(rng);
        }
        if (spec.noise.brightness_sigma > 0.0) {
            for (auto& px : f.rgb.pixels()) {
                if (px == kVoidColor) {
                    continue;
                }
                auto scale = [gain](std::uint8_t c) {
                    return static_cast<std::uint8_t>(std::clamp(std::lround(c * gain), 0L, 255L));
                };
                px = {scale(px.r), scale(px.g), scale(px.b)};
            }
        }
        if (spec.noise.depth_sigma > 0.0) {
            for (auto& d : f.depth.pixels()) {
                const double jitter = 1.0 + spec.noise.depth_sigma * normal(rng);
                if (d > 0.0f) {
                    d = static_cast<float>(std::max(0.0, d * jitter));
                }
            }
        }
        scene.frames.push_back(std::move(f));
    }
    return scene;
}

SceneDataset dataset_from(const SyntheticScene& scene)
{
    SceneDataset ds;
    ds.scene_id = "synthetic";
    ds.camera = scene.camera;
    ds.grid = scene.spec.grid;
    for (const auto& f : scene.frames) {
        FrameRecord rec;
        rec.id = f.id;
        rec.position = f.recorded_position;
        rec.attitude_deg = f.attitude_deg;
        rec.pose = pose_from_attitude(f.recorded_position, f.attitude_deg, ds.rig);
        ds.frames.push_back(rec);
    }
    return ds;
}

std::vector<FrameObservation> observations_from(const SyntheticScene& scene, const SceneDataset& ds, Split split)
{
    std::vector<FrameObservation> out;
    for (const FrameRecord* rec : ds.frames_in(split)) {
        const auto it = std::find_if(scene.frames.begin(), scene.frames.end(),
                                     [&](const SyntheticFrame& f) { return f.id == rec->id; });
        if (it == scene.frames.end()) {
            throw Error("synthetic scene has no frame " + std::to_string(rec->id));
        }
        out.push_back(make_observation(rec->id, rec->pose, it->rgb, it->depth, scene.camera));
    }
    return out;
}

SceneDataset write_synthetic(const SyntheticScene& scene, const fs::path& dir)
{
    fs::create_directories(dir / "rgb");
    fs::create_directories(dir / "depth");
    SceneDataset ds = dataset_from(scene);
    ds.root = fs::absolute(dir);
    for (std::size_t i = 0; i < scene.frames.size(); ++i) {
        const SyntheticFrame& f = scene.frames[i];
        FrameRecord& rec = ds.frames[i];
        rec.rgb = ds.root / "rgb" / (frame_stem(f.id) + ".png");
        rec.depth = ds.root / "depth" / (frame_stem(f.id) + ".pfm");
        write_png_rgb(rec.rgb, f.rgb);
        write_pfm(rec.depth, f.depth);
    }
    write_manifest(dir / "manifest.txt", ds);

    const GridSpec grid = scene.spec.grid.at_scale(scene.spec.reference_voxel_size);
    std::ofstream out(dir / "surface_voxels.txt");
    out << "# ix iy iz x y z at voxel size " << scene.spec.reference_voxel_size << "\n" << std::setprecision(17);
    for (const Index3& v : scene.world().surface_voxels(grid)) {
        const Vec3 c = grid.voxel_center(v[0], v[1], v[2]);
        out << v[0] << ' ' << v[1] << ' ' << v[2] << ' ' << c.x() << ' ' << c.y() << ' ' << c.z() << '\n';
    }
    return load_scene(dir / "manifest.txt");
}

} // namespace msvc
