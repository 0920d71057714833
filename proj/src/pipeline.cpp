#include "msvc/pipeline.hpp"

#include "msvc/error.hpp"
#include "msvc/image_io.hpp"
#include "msvc/metrics.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace msvc {

namespace fs = std::filesystem;

CarveParams ParamOverrides::for_scale(double voxel_size) const
{
    CarveParams p = CarveParams::defaults_for(voxel_size);
    p.eps_seen = eps_seen.value_or(p.eps_seen);
    p.seen_threshold = seen_threshold.value_or(p.seen_threshold);
    p.alpha = alpha.value_or(p.alpha);
    p.sigma = sigma.value_or(p.sigma);
    p.eps_hsv = eps_hsv.value_or(p.eps_hsv);
    p.max_distance = max_distance.value_or(p.max_distance);
    return p;
}

SplitSummary EvalReport::summary(Split split) const
{
    SplitSummary s;
    double sum = 0.0;
    double sum_unmasked = 0.0;
    std::size_t finite_unmasked = 0;
    for (const auto& f : frames) {
        if (f.split != split) {
            continue;
        }
        ++s.frames;
        sum += f.psnr;
        if (!std::isnan(f.psnr_unmasked)) {
            sum_unmasked += f.psnr_unmasked;
            ++finite_unmasked;
        }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean_psnr = s.frames ? sum / static_cast<double>(s.frames) : nan;
    s.mean_psnr_unmasked = finite_unmasked ? sum_unmasked / static_cast<double>(finite_unmasked) : nan;
    return s;
}

std::string scale_tag(double voxel_size)
{
    std::ostringstream s;
    s << voxel_size;
    return s.str();
}

std::string frame_stem(int id)
{
    std::ostringstream s;
    s << std::setw(6) << std::setfill('0') << id;
    return s.str();
}

void write_view(const fs::path& dir, int id, const RenderedView& view)
{
    fs::create_directories(dir);
    const std::string stem = frame_stem(id);
    write_png_rgb(dir / (stem + ".png"), view.rgb);
    write_mask_png(dir / (stem + "_mask.png"), view.mask);
    write_pfm(dir / (stem + "_depth.pfm"), view.zbuffer);
}

SceneDataset with_split(const SceneDataset& scene, double train_fraction, int stride)
{
    for (const auto& f : scene.frames) {
        if (f.split != Split::none) {
            return scene;
        }
    }
    return split_dataset(scene, train_fraction, stride);
}

namespace {

std::string number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::ostringstream s;
    s << std::setprecision(10) << v;
    return s.str();
}

nlohmann::json json_number(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    return number(v);
}

FrameScore score(int id, Split split, const RgbImage& pred, const MaskImage& empty, const RgbImage& truth)
{
    FrameScore s;
    s.id = id;
    s.split = split;
    s.psnr = psnr(pred, truth);
    std::size_t n_empty = 0;
    for (auto m : empty.pixels()) {
        n_empty += m ? 1 : 0;
    }
    s.empty_fraction = static_cast<double>(n_empty) / static_cast<double>(empty.size());
    s.psnr_unmasked =
        n_empty == empty.size() ? std::numeric_limits<double>::quiet_NaN() : psnr_unmasked(pred, truth, empty);
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void finish_summaries(EvalReport& report)
{
    report.train = report.summary(Split::train);
    report.test = report.summary(Split::test);
}

} // namespace

void write_report(const fs::path& dir, const EvalReport& r)
{
    fs::create_directories(dir);
    std::ofstream txt(dir / "report.txt");
    if (!txt) {
        throw Error("cannot write " + (dir / "report.txt").string());
    }
    txt << "scene=" << r.scene_id << '\n';
    txt << "scales=";
    for (std::size_t i = 0; i < r.scales.size(); ++i) {
        txt << (i ? "," : "") << scale_tag(r.scales[i].voxel_size);
    }
    txt << '\n';
    for (const auto& [name, s] : {std::pair{"train", r.train}, std::pair{"test", r.test}}) {
        txt << name << ".frames=" << s.frames << '\n';
        txt << name << ".mean_psnr=" << number(s.mean_psnr) << '\n';
        txt << name << ".mean_psnr_unmasked=" << number(s.mean_psnr_unmasked) << '\n';
    }
    txt << "blend.empty_fraction=" << number(r.blend_empty_fraction) << '\n';
    for (const auto& s : r.scales) {
        const std::string k = "scale." + scale_tag(s.voxel_size) + ".";
        txt << k << "voxels=" << s.carve.survivors << '\n';
        txt << k << "blocks=" << s.carve.blocks << '\n';
        txt << k << "empty_fraction=" << number(s.empty_fraction) << '\n';
        txt << k << "carve_s=" << number(s.carve.total_s) << '\n';
        txt << k << "projection_s=" << number(s.carve.stages.projection_s) << '\n';
        txt << k << "colorization_s=" << number(s.carve.stages.colorization_s) << '\n';
        txt << k << "render_s=" << number(s.render_s) << '\n';
    }
    for (const auto& f : r.frames) {
        const std::string k = "frame." + frame_stem(f.id) + ".";
        txt << k << "split=" << to_string(f.split) << '\n';
        txt << k << "psnr=" << number(f.psnr) << '\n';
        txt << k << "psnr_unmasked=" << number(f.psnr_unmasked) << '\n';
        txt << k << "empty_fraction=" << number(f.empty_fraction) << '\n';
    }
    for (const auto& t : r.train_timings) {
        const std::string k = "timing." + frame_stem(t.frame_id) + ".";
        txt << k << "projection_s=" << number(t.projection_s) << '\n';
        txt << k << "colorization_s=" << number(t.colorization_s) << '\n';
        txt << k << "total_s=" << number(t.total_s()) << '\n';
    }
    txt << "total_s=" << number(r.total_s) << '\n';

    nlohmann::json j;
    j["scene"] = r.scene_id;
    for (const auto& [name, s] : {std::pair{"train", r.train}, std::pair{"test", r.test}}) {
        j[name] = {{"frames", s.frames},
                   {"mean_psnr", json_number(s.mean_psnr)},
                   {"mean_psnr_unmasked", json_number(s.mean_psnr_unmasked)}};
    }
    j["blend"] = {{"empty_fraction", json_number(r.blend_empty_fraction)}};
    j["scales"] = nlohmann::json::array();
    for (const auto& s : r.scales) {
        j["scales"].push_back({{"voxel_size", s.voxel_size},
                               {"voxels", s.carve.survivors},
                               {"blocks", s.carve.blocks},
                               {"empty_fraction", json_number(s.empty_fraction)},
                               {"carve_s", s.carve.total_s},
                               {"projection_s", s.carve.stages.projection_s},
                               {"colorization_s", s.carve.stages.colorization_s},
                               {"render_s", s.render_s},
                               {"params",
                                {{"eps_seen", s.params.eps_seen},
                                 {"seen_threshold", s.params.seen_threshold},
                                 {"alpha", s.params.alpha},
                                 {"sigma", s.params.sigma},
                                 {"eps_hsv", s.params.eps_hsv},
                                 {"max_distance", s.params.max_distance}}}});
    }
    j["frames"] = nlohmann::json::array();
    for (const auto& f : r.frames) {
        j["frames"].push_back({{"id", f.id},
                               {"split", std::string(to_string(f.split))},
                               {"psnr", json_number(f.psnr)},
                               {"psnr_unmasked", json_number(f.psnr_unmasked)},
                               {"empty_fraction", f.empty_fraction}});
    }
    j["train_timings"] = nlohmann::json::array();
    for (const auto& t : r.train_timings) {
        j["train_timings"].push_back({{"id", t.frame_id},
                                      {"projection_s", t.projection_s},
                                      {"colorization_s", t.colorization_s},
                                      {"total_s", t.total_s()}});
    }
    j["total_s"] = r.total_s;
    std::ofstream js(dir / "report.json");
    js << j.dump(2) << '\n';
}

EvalReport run_pipeline(const SceneDataset& input, const PipelineOptions& options, const fs::path& out_dir,
                        const FrameLoader& loader)
{
    const auto t_start = std::chrono::steady_clock::now();
    std::string stage = "load";
    EvalReport report;
    report.scene_id = input.scene_id;
    try {
        fs::create_directories(out_dir);
        fs::remove(out_dir / "FAILED");
        const ScaleSet scales(options.scales);
        const SceneDataset scene = with_split(input, options.train_fraction, options.stride);
        const std::optional<GridHint> hint = options.grid ? options.grid : scene.grid;
        if (!hint) {
            throw Error("no carving volume: the scene has no grid line and none was given");
        }
        const FrameLoader load = loader ? loader : [&](const FrameRecord& r) { return load_frame(scene, r); };

        std::vector<const FrameRecord*> records = scene.frames_in(Split::train);
        const std::vector<const FrameRecord*> test = scene.frames_in(Split::test);
        if (records.empty()) {
            throw Error("the scene has no training frames");
        }
        const std::size_t n_train = records.size();
        records.insert(records.end(), test.begin(), test.end());

        std::vector<FrameObservation> train_obs;
        std::map<int, RgbImage> truth;
        for (std::size_t i = 0; i < records.size(); ++i) {
            LoadedFrame f = load(*records[i]);
            if (i < n_train) {
                train_obs.push_back(make_observation(records[i]->id, records[i]->pose, f.rgb, std::move(f.depth),
                                                     scene.camera));
            }
            truth.emplace(records[i]->id, std::move(f.rgb));
        }

        stage = "carve";
        std::vector<CarvedModel> models;
        std::map<int, ImageTiming> timings;
        for (double vs : scales.sizes()) {
            ScaleReport sr;
            sr.voxel_size = vs;
            sr.params = options.overrides.for_scale(vs);
            CarveOptions co;
            co.exec = options.exec;
            co.scene_id = scene.scene_id;
            CarveResult cr = carve_scene(train_obs, scene.camera, hint->at_scale(vs), sr.params, co);
            sr.carve = cr.stats;
            for (const auto& ft : cr.stats.per_frame) {
                ImageTiming& t = timings[ft.frame_id];
                t.frame_id = ft.frame_id;
                t.projection_s += ft.stages.projection_s;
                t.colorization_s += ft.stages.colorization_s;
            }
            if (options.write_images) {
                fs::create_directories(out_dir / "models");
                write_model(out_dir / "models" / ("model_" + scale_tag(vs) + ".msvc"), cr.model);
            }
            models.push_back(std::move(cr.model));
            report.scales.push_back(sr);
        }
        for (const auto& [id, t] : timings) {
            report.train_timings.push_back(t);
        }

        std::vector<double> scale_empty(models.size(), 0.0);
        double blend_empty = 0.0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const FrameRecord& rec = *records[i];
            stage = "render";
            std::vector<RenderedView> views;
            for (std::size_t s = 0; s < models.size(); ++s) {
                const auto t0 = std::chrono::steady_clock::now();
                RenderOptions ro;
                ro.max_distance = report.scales[s].params.max_distance;
                ro.exec = options.exec;
                views.push_back(render(models[s], rec.pose, scene.camera, ro));
                report.scales[s].render_s += seconds_since(t0);
                scale_empty[s] += views.back().empty_fraction();
                if (options.write_images) {
                    write_view(out_dir / ("scale_" + scale_tag(models[s].voxel_size)), rec.id, views.back());
                }
            }
            stage = "blend";
            const BlendResult blended = blend_scales(views);
            blend_empty += blended.empty_fraction();
            if (options.write_images) {
                fs::create_directories(out_dir / "blend");
                write_png_rgb(out_dir / "blend" / (frame_stem(rec.id) + ".png"), blended.rgb);
                write_mask_png(out_dir / "blend" / (frame_stem(rec.id) + "_mask.png"), blended.mask);
            }
            stage = "eval";
            report.frames.push_back(score(rec.id, rec.split, blended.rgb, blended.mask, truth.at(rec.id)));
        }
        const auto n = static_cast<double>(records.size());
        for (std::size_t s = 0; s < models.size(); ++s) {
            report.scales[s].empty_fraction = scale_empty[s] / n;
        }
        report.blend_empty_fraction = blend_empty / n;
        finish_summaries(report);
        report.total_s = seconds_since(t_start);

        stage = "write";
        write_report(out_dir, report);
        return report;
    } catch (const std::exception& e) {
        write_failed_marker(out_dir, stage, e.what());
        throw StageError(stage, e.what());
    }
}

void write_failed_marker(const fs::path& dir, const std::string& stage, const std::string& what)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream marker(dir / "FAILED");
    marker << "[" << stage << "] " << what << '\n';
}

EvalReport evaluate_directory(const SceneDataset& input, const fs::path& pred_dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    const SceneDataset scene = with_split(input, 0.8, 1);
    EvalReport report;
    report.scene_id = scene.scene_id;
    for (const auto& rec : scene.frames) {
        const fs::path png = pred_dir / (frame_stem(rec.id) + ".png");
        if (!fs::exists(png)) {
            continue;
        }
        const RgbImage pred = read_png_rgb(png);
        const RgbImage truth = read_png_rgb(rec.rgb);
        const fs::path mask_path = pred_dir / (frame_stem(rec.id) + "_mask.png");
        const MaskImage mask = fs::exists(mask_path) ? read_mask_png(mask_path) : MaskImage(pred.width(), pred.height(), 0);
        report.frames.push_back(score(rec.id, rec.split, pred, mask, truth));
    }
    if (report.frames.empty()) {
        throw Error("no prediction images NNNNNN.png in " + pred_dir.string() + " match the scene's frames");
    }
    double empty = 0.0;
    for (const auto& f : report.frames) {
        empty += f.empty_fraction;
    }
    report.blend_empty_fraction = empty / static_cast<double>(report.frames.size());
    finish_summaries(report);
    report.total_s = seconds_since(t0);
    return report;
}

} // namespace msvc
