#include "msvc/dataset.hpp"

#include "msvc/error.hpp"
#include "msvc/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace msvc {

namespace fs = std::filesystem;

DatasetError::DatasetError(std::vector<std::string> problems)
    : Error([&] {
          std::string msg = "dataset has " + std::to_string(problems.size()) + " problem(s):";
          for (const auto& p : problems) {
              msg += "\n  " + p;
          }
          return msg;
      }()),
      problems_(std::move(problems))
{
}

std::string_view to_string(Split split)
{
    switch (split) {
    case Split::train: return "train";
    case Split::test: return "test";
    default: return "none";
    }
}

GridSpec GridHint::at_scale(double voxel_size) const
{
    return GridSpec::from_bounds(min_corner, extent, voxel_size, block_size);
}

std::vector<const FrameRecord*> SceneDataset::frames_in(Split split) const
{
    std::vector<const FrameRecord*> out;
    for (const auto& f : frames) {
        if (f.split == split) {
            out.push_back(&f);
        }
    }
    return out;
}

const FrameRecord& SceneDataset::frame(int id) const
{
    for (const auto& f : frames) {
        if (f.id == id) {
            return f;
        }
    }
    throw Error("scene '" + scene_id + "' has no frame " + std::to_string(id));
}

FramePose pose_from_attitude(const Vec3& position, const Vec3& ypr_deg, const CameraRig& rig)
{
    const Vec3 euler(deg_to_rad(ypr_deg[2]), deg_to_rad(ypr_deg[1]), deg_to_rad(ypr_deg[0]));
    return FramePose::from_euler(position, euler, rig);
}

namespace {

std::vector<double> parse_numbers(std::istringstream& in, std::size_t count, bool& ok)
{
    std::vector<double> v(count);
    for (auto& x : v) {
        std::string tok;
        if (!(in >> tok)) {
            ok = false;
            return v;
        }
        try {
            std::size_t used = 0;
            x = std::stod(tok, &used);
            ok = ok && used == tok.size();
        } catch (const std::exception&) {
            // stod rejects "nan"/"inf" spellings on some platforms; treat
            // them as non-finite values rather than syntax errors.
            if (tok == "nan" || tok == "NaN") {
                x = std::nan("");
            } else if (tok == "inf" || tok == "-inf") {
                x = tok[0] == '-' ? -INFINITY : INFINITY;
            } else {
                ok = false;
            }
        }
    }
    return v;
}

Split parse_split(const std::string& tok, bool& ok)
{
    if (tok == "train") {
        return Split::train;
    }
    if (tok == "test") {
        return Split::test;
    }
    ok = false;
    return Split::none;
}

} // namespace

SceneDataset load_scene(const fs::path& manifest_arg)
{
    const fs::path manifest = fs::is_directory(manifest_arg) ? manifest_arg / "manifest.txt" : manifest_arg;
    std::ifstream in(manifest);
    if (!in) {
        throw DatasetError({"cannot open manifest '" + manifest.string() + "'"});
    }
    SceneDataset scene;
    scene.root = fs::absolute(manifest).parent_path();
    scene.scene_id = scene.root.filename().string();

    std::vector<std::string> problems;
    bool have_camera = false;
    bool have_header = false;
    std::string line;
    int line_no = 0;
    struct PendingFrame {
        FrameRecord rec;
        int line = 0;
        bool finite = true;
    };
    std::vector<PendingFrame> pending;

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) {
            continue;
        }
        const std::string where = manifest.filename().string() + ":" + std::to_string(line_no) + ": ";
        bool ok = true;
        if (key == "msvc-manifest") {
            int version = 0;
            ls >> version;
            if (version != 1) {
                problems.push_back(where + "unsupported manifest version");
            }
            have_header = true;
        } else if (key == "scene") {
            ls >> scene.scene_id;
        } else if (key == "camera") {
            const auto v = parse_numbers(ls, 6, ok);
            if (!ok) {
                problems.push_back(where + "camera needs fx fy cx cy width height");
                continue;
            }
            scene.camera = {v[0], v[1], v[2], v[3], static_cast<int>(v[4]), static_cast<int>(v[5])};
            try {
                scene.camera.validate();
                have_camera = true;
            } catch (const Error& e) {
                problems.push_back(where + e.what());
            }
        } else if (key == "euler_order") {
            std::string order;
            ls >> order;
            try {
                scene.rig.order = parse_euler_order(order);
            } catch (const Error& e) {
                problems.push_back(where + e.what());
            }
        } else if (key == "camera_to_body") {
            const auto v = parse_numbers(ls, 3, ok);
            if (!ok) {
                problems.push_back(where + "camera_to_body needs roll pitch yaw in degrees");
                continue;
            }
            scene.camera_to_body_deg = Vec3(v[0], v[1], v[2]);
            scene.rig.camera_to_body = euler_to_rotation(
                Vec3(deg_to_rad(v[0]), deg_to_rad(v[1]), deg_to_rad(v[2])), EulerOrder::zyx);
        } else if (key == "grid") {
            const auto v = parse_numbers(ls, 9, ok);
            if (!ok) {
                problems.push_back(where + "grid needs min xyz, extent xyz and block xyz");
                continue;
            }
            scene.grid = GridHint{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]), Vec3(v[6], v[7], v[8])};
        } else if (key == "frame") {
            PendingFrame pf;
            pf.line = line_no;
            std::string rgb;
            std::string depth;
            if (!(ls >> pf.rec.id >> rgb >> depth)) {
                problems.push_back(where + "frame needs id rgb depth x y z yaw pitch roll");
                continue;
            }
            const auto v = parse_numbers(ls, 6, ok);
            if (!ok) {
                problems.push_back(where + "frame " + std::to_string(pf.rec.id) + ": malformed pose fields");
                continue;
            }
            std::string tag;
            if (ls >> tag) {
                pf.rec.split = parse_split(tag, ok);
                if (!ok) {
                    problems.push_back(where + "frame " + std::to_string(pf.rec.id) + ": unknown split tag '" +
                                       tag + "'");
                    continue;
                }
            }
            pf.rec.rgb = rgb;
            pf.rec.depth = depth;
            pf.rec.position = Vec3(v[0], v[1], v[2]);
            pf.rec.attitude_deg = Vec3(v[3], v[4], v[5]);
            pf.finite = std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
            pending.push_back(std::move(pf));
        } else {
            problems.push_back(where + "unknown record '" + key + "'");
        }
    }
    if (!have_header) {
        problems.push_back(manifest.filename().string() + ": missing 'msvc-manifest 1' header");
    }
    if (!have_camera) {
        problems.push_back(manifest.filename().string() + ": missing or invalid camera record");
    }

    int previous_id = 0;
    bool first = true;
    for (auto& pf : pending) {
        FrameRecord& rec = pf.rec;
        const std::string tag = "frame " + std::to_string(rec.id) + ": ";
        if (!first && rec.id <= previous_id) {
            problems.push_back(tag + "frame ids must be strictly increasing");
        }
        first = false;
        previous_id = rec.id;
        if (!pf.finite) {
            problems.push_back(tag + "non-finite pose field");
        } else {
            try {
                rec.pose = pose_from_attitude(rec.position, rec.attitude_deg, scene.rig);
            } catch (const Error& e) {
                problems.push_back(tag + e.what());
            }
        }
        rec.rgb = rec.rgb.is_absolute() ? rec.rgb : scene.root / rec.rgb;
        rec.depth = rec.depth.is_absolute() ? rec.depth : scene.root / rec.depth;
        for (const auto* p : {&rec.rgb, &rec.depth}) {
            const char* what = p == &rec.rgb ? "RGB" : "depth";
            if (!fs::exists(*p)) {
                problems.push_back(tag + "missing " + what + " file '" + p->string() + "'");
                continue;
            }
            try {
                const ImageSize sz = probe_image_size(*p);
                if (have_camera && (sz.width != scene.camera.width || sz.height != scene.camera.height)) {
                    problems.push_back(tag + what + " image is " + std::to_string(sz.width) + "x" +
                                       std::to_string(sz.height) + ", camera is " +
                                       std::to_string(scene.camera.width) + "x" +
                                       std::to_string(scene.camera.height));
                }
            } catch (const Error& e) {
                problems.push_back(tag + e.what());
            }
        }
        scene.frames.push_back(std::move(rec));
    }
    if (!problems.empty()) {
        throw DatasetError(std::move(problems));
    }
    return scene;
}

void write_manifest(const fs::path& path, const SceneDataset& scene)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write manifest '" + path.string() + "'");
    }
    const fs::path base = fs::absolute(path).parent_path();
    auto rel = [&](const fs::path& p) {
        return p.is_absolute() ? fs::relative(p, base).generic_string() : p.generic_string();
    };
    out << std::setprecision(17);
    out << "msvc-manifest 1\n";
    out << "scene " << (scene.scene_id.empty() ? "scene" : scene.scene_id) << "\n";
    const CameraModel& c = scene.camera;
    out << "camera " << c.fx << ' ' << c.fy << ' ' << c.cx << ' ' << c.cy << ' ' << c.width << ' ' << c.height
        << "\n";
    out << "euler_order " << to_string(scene.rig.order) << "\n";
    if (scene.camera_to_body_deg != Vec3::Zero()) {
        const Vec3& b = scene.camera_to_body_deg;
        out << "camera_to_body " << b[0] << ' ' << b[1] << ' ' << b[2] << "\n";
    }
    if (scene.grid) {
        const GridHint& g = *scene.grid;
        out << "grid " << g.min_corner[0] << ' ' << g.min_corner[1] << ' ' << g.min_corner[2] << ' ' << g.extent[0]
            << ' ' << g.extent[1] << ' ' << g.extent[2] << ' ' << g.block_size[0] << ' ' << g.block_size[1] << ' '
            << g.block_size[2] << "\n";
    }
    out << "# frame id rgb depth x y z yaw pitch roll [split]\n";
    for (const auto& f : scene.frames) {
        out << "frame " << f.id << ' ' << rel(f.rgb) << ' ' << rel(f.depth) << ' ' << f.position[0] << ' '
            << f.position[1] << ' ' << f.position[2] << ' ' << f.attitude_deg[0] << ' ' << f.attitude_deg[1] << ' '
            << f.attitude_deg[2];
        if (f.split != Split::none) {
            out << ' ' << to_string(f.split);
        }
        out << "\n";
    }
    if (!out) {
        throw Error("failed writing manifest '" + path.string() + "'");
    }
}

SceneDataset split_dataset(const SceneDataset& scene, double train_fraction, int stride)
{
    if (stride < 1) {
        throw Error("split: stride must be at least 1");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error("split: train fraction must lie in (0, 1)");
    }
    SceneDataset out = scene;
    out.frames.clear();
    for (std::size_t i = 0; i < scene.frames.size(); i += static_cast<std::size_t>(stride)) {
        out.frames.push_back(scene.frames[i]);
    }
    const std::size_t n = out.frames.size();
    if (n < 2) {
        throw Error("split: need at least 2 sampled frames, got " + std::to_string(n));
    }
    // Tolerance keeps 0.8 * 100 from rounding up to 81.
    const auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
    if (n_train >= n) {
        throw Error("split: test split would be empty (" + std::to_string(n) + " sampled frames)");
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.frames[i].split = i < n_train ? Split::train : Split::test;
    }
    return out;
}

LoadedFrame load_frame(const SceneDataset& scene, const FrameRecord& record)
{
    LoadedFrame f;
    f.rgb = read_png_rgb(record.rgb);
    f.depth = read_depth(record.depth);
    const CameraModel& c = scene.camera;
    if (!f.rgb.same_size(c.width, c.height) || !f.depth.same_size(c.width, c.height)) {
        throw Error("frame " + std::to_string(record.id) + ": image size does not match the camera");
    }
    return f;
}

std::vector<FrameObservation> load_observations(const SceneDataset& scene, Split split)
{
    std::vector<FrameObservation> out;
    for (const FrameRecord* rec : scene.frames_in(split)) {
        LoadedFrame f = load_frame(scene, *rec);
        out.push_back(make_observation(rec->id, rec->pose, f.rgb, std::move(f.depth), scene.camera));
    }
    return out;
}

SceneDataset import_telemetry(const fs::path& dir, const fs::path& manifest_out, const std::string& scene_id)
{
    std::vector<std::string> problems;
    SceneDataset scene;
    scene.scene_id = scene_id.empty() ? fs::absolute(dir).lexically_normal().filename().string() : scene_id;
    if (scene.scene_id.empty()) {
        scene.scene_id = "scene";
    }
    scene.root = fs::absolute(dir);

    std::ifstream intr(dir / "intrinsics.txt");
    if (!intr) {
        throw DatasetError({"missing '" + (dir / "intrinsics.txt").string() + "'"});
    }
    CameraModel& c = scene.camera;
    if (!(intr >> c.fx >> c.fy >> c.cx >> c.cy >> c.width >> c.height)) {
        throw DatasetError({"intrinsics.txt: expected fx fy cx cy width height"});
    }

    std::ifstream csv(dir / "telemetry.csv");
    if (!csv) {
        throw DatasetError({"missing '" + (dir / "telemetry.csv").string() + "'"});
    }
    std::string line;
    std::getline(csv, line); // header
    int line_no = 1;
    while (std::getline(csv, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        FrameRecord rec;
        double x = 0;
        double y = 0;
        double z = 0;
        double yaw = 0;
        double pitch = 0;
        double roll = 0;
        if (!(ls >> rec.id >> x >> y >> z >> yaw >> pitch >> roll)) {
            problems.push_back("telemetry.csv:" + std::to_string(line_no) + ": expected frame,x,y,z,yaw,pitch,roll");
            continue;
        }
        std::ostringstream name;
        name << std::setw(6) << std::setfill('0') << rec.id;
        rec.rgb = scene.root / "rgb" / (name.str() + ".png");
        const fs::path pfm = scene.root / "depth" / (name.str() + ".pfm");
        rec.depth = fs::exists(pfm) ? pfm : scene.root / "depth" / (name.str() + ".png");
        rec.position = Vec3(x, y, z);
        rec.attitude_deg = Vec3(yaw, pitch, roll);
        scene.frames.push_back(rec);
    }
    if (!problems.empty()) {
        throw DatasetError(std::move(problems));
    }
    const fs::path out = manifest_out.empty() ? dir / "manifest.txt" : manifest_out;
    write_manifest(out, scene);
    return load_scene(out);
}

} // namespace msvc
