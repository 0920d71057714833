// msvc: command-line front end for the carving engine.

#include "msvc/carving.hpp"
#include "msvc/dataset.hpp"
#include "msvc/error.hpp"
#include "msvc/image_io.hpp"
#include "msvc/pipeline.hpp"
#include "msvc/renderer.hpp"
#include "msvc/synthetic.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace msvc;

namespace {

void add_param_flags(CLI::App* app, ParamOverrides& p)
{
    app->add_option("--eps-seen", p.eps_seen, "Depth-consistency tolerance in meters (default 2 x voxel size)");
    app->add_option("--seen-threshold", p.seen_threshold, "Votes a voxel must exceed (default 3)");
    app->add_option("--alpha", p.alpha, "Distance weight falls to 1/alpha at max distance (default 10)");
    app->add_option("--sigma", p.sigma, "Occlusion weight width in meters (default 5)");
    app->add_option("--eps-hsv", p.eps_hsv, "Dominant color share a voxel must exceed (default 0.3)");
    app->add_option("--max-distance", p.max_distance, "Carving and rendering range in meters (default 250)");
}

void add_scales_flag(CLI::App* app, std::vector<double>& scales)
{
    app->add_option("--scales", scales, "Voxel sizes in meters, comma separated")->delimiter(',');
}

Split parse_split(const std::string& s)
{
    if (s == "train") {
        return Split::train;
    }
    if (s == "test") {
        return Split::test;
    }
    return Split::none;
}

void print_summary(const EvalReport& r)
{
    std::printf("train: %zu frames, mean PSNR %.4f dB (unmasked %.4f dB)\n", r.train.frames, r.train.mean_psnr,
                r.train.mean_psnr_unmasked);
    std::printf("test:  %zu frames, mean PSNR %.4f dB (unmasked %.4f dB)\n", r.test.frames, r.test.mean_psnr,
                r.test.mean_psnr_unmasked);
    for (const auto& s : r.scales) {
        std::printf("scale %s: %zu voxels, carve %.3f s, empty fraction %.4f\n", scale_tag(s.voxel_size).c_str(),
                    s.carve.survivors, s.carve.total_s, s.empty_fraction);
    }
    std::printf("blended empty fraction %.4f\n", r.blend_empty_fraction);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-scale voxel carving for posed RGB-D image sequences"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file; command-line flags take precedence");
    int jobs = 0;
    app.add_option("--jobs", jobs, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

    // import
    auto* imp = app.add_subcommand("import", "Convert a telemetry directory into a manifest");
    fs::path import_dir, import_manifest;
    std::string import_id;
    imp->add_option("--scene", import_dir, "Telemetry directory")->required()->check(CLI::ExistingDirectory);
    imp->add_option("--out", import_manifest, "Manifest path (default <scene>/manifest.txt)");
    imp->add_option("--scene-id", import_id, "Scene name written to the manifest");

    // synth
    auto* syn = app.add_subcommand("synth", "Generate a synthetic aerial scene");
    SyntheticSpec spec = SyntheticSpec::reference();
    fs::path synth_out;
    syn->add_option("--out", synth_out, "Output directory")->required();
    syn->add_option("--seed", spec.seed, "Noise seed");
    syn->add_option("--frames", spec.frames, "Number of orbit poses");
    syn->add_option("--width", spec.width);
    syn->add_option("--height", spec.height);
    syn->add_option("--focal", spec.focal, "Focal length in pixels");
    syn->add_option("--altitude", spec.altitude, "Orbit altitude in meters");
    syn->add_option("--pose-noise", spec.noise.pose_sigma, "Std dev of recorded position error, meters");
    syn->add_option("--depth-noise", spec.noise.depth_sigma, "Relative depth noise std dev");
    syn->add_option("--brightness-noise", spec.noise.brightness_sigma, "Per-frame relative gain std dev");

    // carve
    auto* carve = app.add_subcommand("carve", "Carve models from the training frames");
    fs::path carve_scene_path, carve_out;
    std::vector<double> carve_scales{0.5, 0.25, 0.125};
    ParamOverrides carve_params;
    carve->add_option("--scene", carve_scene_path, "Manifest or scene directory")->required();
    carve->add_option("--out", carve_out, "Output directory")->required();
    add_scales_flag(carve, carve_scales);
    add_param_flags(carve, carve_params);

    // render
    auto* rend = app.add_subcommand("render", "Render a model at the scene's frame poses");
    fs::path render_scene_path, render_model, render_out;
    std::string render_split = "all";
    double render_max_distance = 250.0;
    rend->add_option("--scene", render_scene_path, "Manifest or scene directory")->required();
    rend->add_option("--model", render_model, "Carved model (.msvc)")->required()->check(CLI::ExistingFile);
    rend->add_option("--out", render_out, "Output directory")->required();
    rend->add_option("--split", render_split, "all, train or test")
        ->check(CLI::IsMember({"all", "train", "test"}));
    rend->add_option("--max-distance", render_max_distance, "Rendering range in meters");

    // blend
    auto* blend = app.add_subcommand("blend", "Composite per-scale renders, finest scale first");
    std::vector<fs::path> blend_in;
    fs::path blend_out;
    blend->add_option("--in", blend_in, "Render directories, finest scale first")->required()->delimiter(',');
    blend->add_option("--out", blend_out, "Output directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "Score predicted images against the scene");
    fs::path eval_scene_path, eval_pred, eval_out;
    eval->add_option("--scene", eval_scene_path, "Manifest or scene directory")->required();
    eval->add_option("--pred", eval_pred, "Directory of NNNNNN.png predictions")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out", eval_out, "Report directory (default: --pred)");

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Carve, render, blend and evaluate");
    fs::path pipe_scene, pipe_out;
    PipelineOptions pipe_opts;
    pipe->add_option("--scene", pipe_scene, "Manifest or scene directory")->required();
    pipe->add_option("--out", pipe_out, "Output directory")->required();
    add_scales_flag(pipe, pipe_opts.scales);
    add_param_flags(pipe, pipe_opts.overrides);
    pipe->add_option("--train-fraction", pipe_opts.train_fraction, "Used when the manifest has no split tags");
    pipe->add_option("--stride", pipe_opts.stride, "Frame sampling stride when the manifest has no split tags");
    pipe->add_flag("--serial", "Use the sequential reference kernels");
    pipe->add_flag("--no-images", "Skip writing models and images");

    CLI11_PARSE(app, argc, argv);
    if (jobs > 0) {
        omp_set_num_threads(jobs);
    }

    std::string stage = app.get_subcommands().front()->get_name();
    try {
        if (imp->parsed()) {
            const SceneDataset ds = import_telemetry(import_dir, import_manifest, import_id);
            std::printf("imported %zu frames\n", ds.frames.size());
        } else if (syn->parsed()) {
            const SceneDataset ds = write_synthetic(generate_synthetic(spec), synth_out);
            std::printf("wrote %zu frames to %s\n", ds.frames.size(), synth_out.string().c_str());
        } else if (carve->parsed()) {
            stage = "load";
            const SceneDataset ds = with_split(load_scene(carve_scene_path), 0.8, 1);
            if (!ds.grid) {
                throw Error("the scene has no grid line");
            }
            const std::vector<FrameObservation> obs = load_observations(ds, Split::train);
            stage = "carve";
            const ScaleSet scales(carve_scales);
            fs::create_directories(carve_out / "models");
            for (double vs : scales.sizes()) {
                CarveOptions co;
                co.scene_id = ds.scene_id;
                const CarveResult r = carve_scene(obs, ds.camera, ds.grid->at_scale(vs), carve_params.for_scale(vs), co);
                const fs::path file = carve_out / "models" / ("model_" + scale_tag(vs) + ".msvc");
                write_model(file, r.model);
                std::printf("%s: %zu voxels in %.3f s (projection %.3f s, colorization %.3f s)\n",
                            file.string().c_str(), r.stats.survivors, r.stats.total_s, r.stats.stages.projection_s,
                            r.stats.stages.colorization_s);
            }
        } else if (rend->parsed()) {
            stage = "load";
            const SceneDataset ds = with_split(load_scene(render_scene_path), 0.8, 1);
            const CarvedModel model = read_model(render_model);
            stage = "render";
            RenderOptions ro;
            ro.max_distance = render_max_distance;
            std::size_t count = 0;
            for (const FrameRecord& rec : ds.frames) {
                if (render_split == "all" || rec.split == parse_split(render_split)) {
                    write_view(render_out, rec.id, render(model, rec.pose, ds.camera, ro));
                    ++count;
                }
            }
            std::printf("rendered %zu views\n", count);
        } else if (blend->parsed()) {
            std::size_t count = 0;
            for (const auto& entry : fs::directory_iterator(blend_in.front())) {
                const std::string name = entry.path().filename().string();
                if (entry.path().extension() != ".png" || name.find("_mask") != std::string::npos) {
                    continue;
                }
                const std::string stem = entry.path().stem().string();
                std::vector<RgbImage> images;
                std::vector<MaskImage> masks;
                for (const auto& dir : blend_in) {
                    images.push_back(read_png_rgb(dir / (stem + ".png")));
                    masks.push_back(read_mask_png(dir / (stem + "_mask.png")));
                }
                const BlendResult b = blend_images(images, masks);
                fs::create_directories(blend_out);
                write_png_rgb(blend_out / (stem + ".png"), b.rgb);
                write_mask_png(blend_out / (stem + "_mask.png"), b.mask);
                ++count;
            }
            std::printf("blended %zu views\n", count);
        } else if (eval->parsed()) {
            stage = "load";
            const SceneDataset ds = load_scene(eval_scene_path);
            stage = "eval";
            const EvalReport r = evaluate_directory(ds, eval_pred);
            write_report(eval_out.empty() ? eval_pred : eval_out, r);
            print_summary(r);
        } else if (pipe->parsed()) {
            stage = "load";
            const SceneDataset ds = load_scene(pipe_scene);
            pipe_opts.exec = pipe->count("--serial") ? Exec::serial : Exec::parallel;
            pipe_opts.write_images = pipe->count("--no-images") == 0;
            print_summary(run_pipeline(ds, pipe_opts, pipe_out));
        }
    } catch (const StageError& e) {
        std::fprintf(stderr, "msvc: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "msvc: [%s] %s\n", stage.c_str(), e.what());
        if (pipe->parsed()) {
            write_failed_marker(pipe_out, stage, e.what());
        }
        return 2;
    }
    return 0;
}
