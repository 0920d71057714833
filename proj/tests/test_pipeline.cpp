#include "fixtures.hpp"

#include "msvc/error.hpp"
#include "msvc/image_io.hpp"
#include "msvc/pipeline.hpp"
#include "msvc/synthetic.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

using namespace msvc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> read_report(const fs::path& p)
{
    std::map<std::string, std::string> kv;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            kv[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    return kv;
}

// Straight from the definition, in long double.
double reference_psnr(const RgbImage& a, const RgbImage& b)
{
    long double sum = 0.0L;
    for (std::size_t i = 0; i < a.pixels().size(); ++i) {
        const Rgb8 p = a.pixels()[i];
        const Rgb8 q = b.pixels()[i];
        for (const auto& [x, y] : {std::pair{p.r, q.r}, std::pair{p.g, q.g}, std::pair{p.b, q.b}}) {
            const long double d = static_cast<long double>(x) - static_cast<long double>(y);
            sum += d * d;
        }
    }
    const long double mse = sum / (3.0L * static_cast<long double>(a.pixels().size()));
    return static_cast<double>(10.0L * std::log10(255.0L * 255.0L / mse));
}

struct ToyRun {
    fs::path scene_dir;
    SceneDataset scene;
};

ToyRun toy_on_disk(const std::string& name)
{
    ToyRun t;
    t.scene_dir = fixture::temp_dir(name);
    t.scene = write_synthetic(generate_synthetic(fixture::toy_spec()), t.scene_dir);
    return t;
}

PipelineOptions toy_options()
{
    PipelineOptions o;
    o.scales = {0.5, 1.0};
    return o;
}

} // namespace

TEST_CASE("pipeline writes the documented layout and a recomputable report")
{
    const ToyRun toy = toy_on_disk("pipe_scene");
    const fs::path out = fixture::temp_dir("pipe_out");
    const EvalReport r = run_pipeline(toy.scene, toy_options(), out);

    CHECK(r.train.frames == 4);
    CHECK(r.test.frames == 1);
    REQUIRE(r.frames.size() == 5);
    REQUIRE(r.scales.size() == 2);
    CHECK(r.scales[0].voxel_size == 0.5);
    CHECK(r.train_timings.size() == 4);
    for (const char* f : {"models/model_0.5.msvc", "models/model_1.msvc", "scale_0.5/000000.png",
                          "scale_0.5/000000_mask.png", "scale_1/000004_depth.pfm", "blend/000004.png",
                          "blend/000004_mask.png", "report.txt", "report.json"}) {
        CHECK_MESSAGE(fs::exists(out / f), f);
    }
    CHECK_FALSE(fs::exists(out / "FAILED"));

    const auto kv = read_report(out / "report.txt");
    double train_sum = 0.0;
    for (const auto& rec : toy.scene.frames) {
        const RgbImage blended = read_png_rgb(out / "blend" / (frame_stem(rec.id) + ".png"));
        const RgbImage truth = read_png_rgb(rec.rgb);
        const double recomputed = reference_psnr(blended, truth);
        const double reported = std::stod(kv.at("frame." + frame_stem(rec.id) + ".psnr"));
        CHECK(std::abs(recomputed - reported) <= 0.001);
        if (rec.id < 4) {
            train_sum += recomputed;
        }
    }
    CHECK(std::abs(train_sum / 4.0 - std::stod(kv.at("train.mean_psnr"))) <= 0.001);
    CHECK(kv.at("scales") == "0.5,1");

    const auto j = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(j["train"]["frames"] == 4);
    CHECK(std::abs(j["test"]["mean_psnr"].get<double>() - r.test.mean_psnr) < 1e-9);
    CHECK(j["scales"].size() == 2);

    // Blend never leaves more holes than any single scale.
    for (const auto& s : r.scales) {
        CHECK(r.blend_empty_fraction <= s.empty_fraction);
    }

    // Scoring the blend directory reproduces the pipeline's numbers.
    const EvalReport again = evaluate_directory(with_split(toy.scene, 0.8, 1), out / "blend");
    REQUIRE(again.frames.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(again.frames[i].psnr == r.frames[i].psnr);
        CHECK(again.frames[i].empty_fraction == r.frames[i].empty_fraction);
    }
    CHECK(again.test.mean_psnr == r.test.mean_psnr);
}

TEST_CASE("pipeline output is deterministic and independent of the kernel")
{
    const ToyRun toy = toy_on_disk("det_scene");
    const fs::path a = fixture::temp_dir("det_a");
    const fs::path b = fixture::temp_dir("det_b");
    PipelineOptions serial = toy_options();
    serial.exec = Exec::serial;
    const EvalReport ra = run_pipeline(toy.scene, toy_options(), a);
    const EvalReport rb = run_pipeline(toy.scene, serial, b);
    for (std::size_t i = 0; i < ra.frames.size(); ++i) {
        CHECK(ra.frames[i].psnr == rb.frames[i].psnr);
    }
    for (const char* f : {"models/model_0.5.msvc", "scale_0.5/000002.png", "scale_0.5/000002_depth.pfm",
                          "blend/000003.png", "blend/000003_mask.png"}) {
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
}

TEST_CASE("prediction directories without masks are scored on the full image")
{
    const ToyRun toy = toy_on_disk("pred_scene");
    const fs::path pred = fixture::temp_dir("pred");
    const SceneDataset tagged = with_split(toy.scene, 0.8, 1);
    for (const auto& rec : tagged.frames) {
        RgbImage img = read_png_rgb(rec.rgb);
        for (auto& p : img.pixels()) {
            p.g = static_cast<std::uint8_t>(std::min(255, p.g + 5));
        }
        write_png_rgb(pred / (frame_stem(rec.id) + ".png"), img);
    }
    const EvalReport r = evaluate_directory(tagged, pred);
    REQUIRE(r.frames.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        const RgbImage p = read_png_rgb(pred / (frame_stem(tagged.frames[i].id) + ".png"));
        CHECK(std::abs(r.frames[i].psnr - reference_psnr(p, read_png_rgb(tagged.frames[i].rgb))) < 1e-9);
        CHECK(r.frames[i].empty_fraction == 0.0);
        CHECK(r.frames[i].psnr_unmasked == r.frames[i].psnr);
    }
    // Only the frames present are scored, so a directory of refined test
    // views works on its own.
    fs::remove(pred / "000002.png");
    const EvalReport partial = evaluate_directory(tagged, pred);
    CHECK(partial.frames.size() == 4);
    CHECK(partial.train.frames == 3);
    CHECK(partial.test.frames == 1);
    CHECK_THROWS_AS(evaluate_directory(tagged, fixture::temp_dir("pred_empty")), Error);
}

TEST_CASE("a failing stage leaves a FAILED marker naming the stage")
{
    const ToyRun toy = toy_on_disk("fail_scene");
    fs::remove(toy.scene.frames[2].rgb);
    const fs::path out = fixture::temp_dir("fail_out");
    try {
        run_pipeline(toy.scene, toy_options(), out);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
    }
    REQUIRE(fs::exists(out / "FAILED"));
    CHECK(slurp(out / "FAILED").rfind("[load]", 0) == 0);

    PipelineOptions bad = toy_options();
    bad.scales = {0.3};
    const ToyRun ok = toy_on_disk("fail_scene2");
    const fs::path out2 = fixture::temp_dir("fail_out2");
    try {
        run_pipeline(ok.scene, bad, out2);
        FAIL("expected a StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "carve");
    }
    CHECK(slurp(out2 / "FAILED").rfind("[carve]", 0) == 0);
}

TEST_CASE("parameter overrides apply on top of per-scale defaults")
{
    ParamOverrides o;
    o.eps_hsv = 0.5;
    const CarveParams p = o.for_scale(0.25);
    CHECK(p.eps_hsv == 0.5);
    CHECK(p.eps_seen == 0.5);
    CHECK(p.seen_threshold == 3);
    o.eps_seen = 2.0;
    CHECK(o.for_scale(0.25).eps_seen == 2.0);
    CHECK(scale_tag(0.125) == "0.125");
    CHECK(scale_tag(1.0) == "1");
    CHECK(frame_stem(42) == "000042");
}
