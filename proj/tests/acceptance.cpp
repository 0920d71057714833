// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Tolerances are pinned below.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "msvc/carving.hpp"
#include "msvc/error.hpp"
#include "msvc/hsv.hpp"
#include "msvc/metrics.hpp"
#include "msvc/pipeline.hpp"
#include "msvc/renderer.hpp"
#include "msvc/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace msvc;

namespace {

constexpr double kOracleSeconds = 5.0;
constexpr double kBlockSeconds = 60.0;
constexpr double kNormTolerance = 1e-6;
constexpr std::size_t kNormMinVoxels = 10000;
constexpr double kWeightTolerance = 1e-12;
constexpr std::size_t kRenderMaxVoxels = 1000;
constexpr double kParityGapDb = 1.0;
constexpr double kParityFloorDb = 25.0;
constexpr double kParitySeconds = 600.0;
constexpr double kNoiseGapDb = 3.0;
constexpr double kLinearityRatio = 2.2;
constexpr int kLinearityRuns = 3;
constexpr double kPsnrOffsetDb = 34.15;
constexpr double kPsnrOffsetTolerance = 0.01;

// Bins whose 8-bit midpoint color quantizes into a neighbor.
const std::vector<int> kBoundaryBins = {
    1,   100, 102, 120, 300, 302, 320, 400, 401, 402, 410,  420,  501,  600,  602,  620,  800,  802,
    820, 900, 901, 902, 910, 920, 1001, 1100, 1102, 1120, 1300, 1302, 1320, 1400, 1401, 1402, 1410, 1420,
};

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const char* f, Args... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Scene {
    SyntheticScene synthetic;
    SceneDataset dataset;
    std::vector<FrameObservation> frames;
};

Scene make_scene(const SyntheticSpec& spec)
{
    Scene s;
    s.synthetic = generate_synthetic(spec);
    s.dataset = dataset_from(s.synthetic);
    for (auto& f : s.dataset.frames) {
        f.split = Split::train;
    }
    s.frames = observations_from(s.synthetic, s.dataset, Split::train);
    return s;
}

Outcome oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto toy = fixture::make(fixture::toy_spec());
    const GridSpec grid = fixture::toy_grid();
    const CarveParams params = CarveParams::defaults_for(1.0);
    const oracle::Carve ref = oracle::carve(grid, toy.frames, toy.synthetic.camera, params);

    const CarveResult result = carve_scene(toy.frames, toy.synthetic.camera, grid, params);
    const VoxelBlock block = carve_block(grid, grid.blocks().front(), toy.frames, toy.synthetic.camera, params);
    std::size_t seen_mismatch = 0;
    std::size_t bin_mismatch = 0;
    for (std::size_t v = 0; v < grid.voxel_count(); ++v) {
        seen_mismatch += block.seen()[v] != ref.seen[v];
        std::size_t nonzero = 0;
        for (int b = 0; b < kBinCount; ++b) {
            nonzero += ref.hist[v][b] != 0.0;
        }
        bool same = block.bins()[v].entries().size() == nonzero;
        for (const auto& e : block.bins()[v].entries()) {
            same = same && e.weight == ref.hist[v][e.bin];
        }
        bin_mismatch += !same;
    }
    const bool models_equal = result.model.voxels == ref.survivors;
    const double s = seconds_since(t0);
    return {seen_mismatch == 0 && bin_mismatch == 0 && models_equal && s < kOracleSeconds,
            fmt("%zu voxels, %zu survivors; seen mismatches %zu, bin mismatches %zu, models equal %s; %.2f s (< %.0f s)",
                grid.voxel_count(), ref.survivors.size(), seen_mismatch, bin_mismatch, models_equal ? "yes" : "no", s,
                kOracleSeconds)};
}

Outcome block_invariance(const Scene& ref)
{
    const SyntheticSpec& spec = ref.synthetic.spec;
    const GridSpec base = spec.grid.at_scale(0.5);
    const GridSpec one = base.with_block_size(base.extent);
    const GridSpec eight = base.with_block_size(base.extent / 2.0);
    const CarveParams params = CarveParams::defaults_for(0.5);
    auto t0 = std::chrono::steady_clock::now();
    const CarveResult a = carve_scene(ref.frames, ref.synthetic.camera, one, params);
    const double sa = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const CarveResult b = carve_scene(ref.frames, ref.synthetic.camera, eight, params);
    const double sb = seconds_since(t0);
    const bool equal = a.model.voxels == b.model.voxels;
    return {equal && a.stats.blocks == 1 && b.stats.blocks == 8 && sa < kBlockSeconds && sb < kBlockSeconds,
            fmt("%zu vs %zu blocks, %zu vs %zu voxels, set-identical %s; %.2f s and %.2f s (< %.0f s)",
                a.stats.blocks, b.stats.blocks, a.model.voxels.size(), b.model.voxels.size(), equal ? "yes" : "no", sa,
                sb, kBlockSeconds)};
}

Outcome normalization(const Scene& ref)
{
    const GridSpec grid = ref.synthetic.spec.grid.at_scale(0.5);
    const CarveParams params = CarveParams::defaults_for(0.5);
    std::size_t voted = 0;
    double worst = 0.0;
    for (const auto& range : grid.blocks()) {
        const VoxelBlock block = carve_block(grid, range, ref.frames, ref.synthetic.camera, params);
        for (std::size_t v = 0; v < block.voxel_count(); ++v) {
            if (!(block.bins()[v].total() > 0.0)) {
                continue;
            }
            double sum = 0.0;
            for (const auto& e : block.bins()[v].normalized()) {
                sum += e.weight;
            }
            worst = std::max(worst, std::abs(sum - 1.0));
            ++voted;
        }
    }
    return {voted >= kNormMinVoxels && worst <= kNormTolerance,
            fmt("%zu voxels with votes (>= %zu), max |sum - 1| = %.3g (<= %.0e)", voted, kNormMinVoxels, worst,
                kNormTolerance)};
}

Outcome analytic_weights()
{
    const CarveParams p = CarveParams::defaults_for(0.5);
    const double e1 = std::abs(f1(0.0, p.alpha, p.max_distance) - 1.0);
    const double e2 = std::abs(f1(250.0, p.alpha, p.max_distance) - 1.0 / p.alpha);
    const double e3 = std::abs(f2(0.0, p.sigma) - 1.0);
    const double e4 = std::abs(f2(p.sigma, p.sigma) - std::exp(-0.5));
    const double worst = std::max({e1, e2, e3, e4});
    return {worst <= kWeightTolerance,
            fmt("f1(0)=%.15g f1(250)=%.15g f2(0)=%.15g f2(sigma)=%.15g, max error %.3g (<= %.0e)",
                f1(0.0, p.alpha, p.max_distance), f1(250.0, p.alpha, p.max_distance), f2(0.0, p.sigma),
                f2(p.sigma, p.sigma), worst, kWeightTolerance)};
}

Outcome hsv_round_trip()
{
    std::vector<int> failing;
    for (int k = 0; k < kBinCount; ++k) {
        if (hsv_discretize(rgb_to_hsv(bin_to_rgb(k))) != k) {
            failing.push_back(k);
        }
    }
    return {failing == kBoundaryBins,
            fmt("%zu of %d bins land in a neighbor after 8-bit rounding; documented list has %zu, lists %s",
                failing.size(), kBinCount, kBoundaryBins.size(), failing == kBoundaryBins ? "match" : "differ")};
}

bool same_view(const RenderedView& a, const RenderedView& b)
{
    return std::ranges::equal(a.rgb.pixels(), b.rgb.pixels()) && std::ranges::equal(a.mask.pixels(), b.mask.pixels()) &&
           std::memcmp(a.zbuffer.pixels().data(), b.zbuffer.pixels().data(),
                       a.zbuffer.pixels().size() * sizeof(float)) == 0;
}

Outcome render_correctness()
{
    const auto toy = fixture::make(fixture::toy_spec());
    const GridSpec grid = fixture::toy_grid();
    std::vector<CarvedModel> models;
    models.push_back(carve_scene(toy.frames, toy.synthetic.camera, grid, CarveParams::defaults_for(1.0)).model);
    // A dense random cloud with many exact depth ties.
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> xy(-8, 8);
    std::uniform_int_distribution<int> z(0, 6);
    std::uniform_int_distribution<int> c(0, 255);
    CarvedModel cloud;
    cloud.voxel_size = 0.5;
    for (std::size_t i = 0; i < kRenderMaxVoxels; ++i) {
        cloud.voxels.push_back({Vec3(0.5 * xy(rng), 0.5 * xy(rng), 0.5 * z(rng)),
                                Rgb8{std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))}});
    }
    models.push_back(cloud);

    const CameraModel& cam = toy.synthetic.camera;
    std::size_t pixels = 0;
    std::size_t wrong = 0;
    std::size_t views = 0;
    bool identical = true;
    for (const auto& model : models) {
        if (model.voxels.size() > kRenderMaxVoxels) {
            return {false, fmt("model has %zu voxels (> %zu)", model.voxels.size(), kRenderMaxVoxels)};
        }
        for (const auto& f : toy.synthetic.frames) {
            const RenderedView serial = render_serial(model, f.true_pose, cam);
            const RenderedView parallel = render_omp(model, f.true_pose, cam);
            identical = identical && same_view(serial, parallel) && same_view(serial, render_serial(model, f.true_pose, cam)) &&
                        same_view(parallel, render_omp(model, f.true_pose, cam));
            const auto ref = oracle::render(model, f.true_pose, cam, 250.0);
            for (std::size_t i = 0; i < ref.size(); ++i) {
                const int x = static_cast<int>(i % static_cast<std::size_t>(cam.width));
                const int y = static_cast<int>(i / static_cast<std::size_t>(cam.width));
                const bool written = serial.mask(x, y) == 0;
                pixels += written;
                bool ok = written == ref[i].written;
                if (ok && written) {
                    ok = serial.zbuffer(x, y) == static_cast<float>(ref[i].depth) &&
                         serial.rgb(x, y) == model.voxels[ref[i].voxel].color;
                }
                wrong += !ok;
            }
            ++views;
        }
    }
    return {wrong == 0 && identical && pixels > 0,
            fmt("%zu views of models with %zu and %zu voxels, %zu written pixels, %zu disagree with brute force; "
                "repeat and serial/parallel bit-identical %s",
                views, models[0].voxels.size(), models[1].voxels.size(), pixels, wrong, identical ? "yes" : "no")};
}

LoadedFrame frame_of(const SyntheticScene& s, const FrameRecord& rec)
{
    for (const auto& f : s.frames) {
        if (f.id == rec.id) {
            return {f.rgb, f.depth};
        }
    }
    throw Error("no synthetic frame " + std::to_string(rec.id));
}

EvalReport run(const SyntheticScene& s, std::vector<double> scales, const std::string& name)
{
    PipelineOptions o;
    o.scales = std::move(scales);
    o.write_images = false;
    const auto out = fixture::temp_dir(name);
    return run_pipeline(dataset_from(s), o, out, [&](const FrameRecord& r) { return frame_of(s, r); });
}

struct PipelineRuns {
    EvalReport clean_multi;
    EvalReport noisy_multi;
    EvalReport clean_single;
    EvalReport noisy_single;
    double clean_multi_s = 0.0;
};

Outcome coverage(const PipelineRuns& runs)
{
    const EvalReport& r = runs.clean_multi;
    bool ok = r.scales.size() == 3;
    std::string per_scale;
    for (const auto& s : r.scales) {
        ok = ok && r.blend_empty_fraction <= s.empty_fraction;
        per_scale += fmt("%s%s: %.4f", per_scale.empty() ? "" : ", ", scale_tag(s.voxel_size).c_str(), s.empty_fraction);
    }
    const double finest = r.scales.empty() ? 0.0 : r.scales.front().empty_fraction;
    ok = ok && r.blend_empty_fraction < finest;
    return {ok, fmt("blended empty fraction %.4f; per scale %s", r.blend_empty_fraction, per_scale.c_str())};
}

Outcome parity(const PipelineRuns& runs)
{
    const EvalReport& r = runs.clean_multi;
    const double gap = std::abs(r.train.mean_psnr - r.test.mean_psnr);
    const bool ok = gap <= kParityGapDb && r.train.mean_psnr >= kParityFloorDb && r.test.mean_psnr >= kParityFloorDb &&
                    runs.clean_multi_s < kParitySeconds;
    const EvalReport& s = runs.clean_single;
    return {ok, fmt("scales 0.5,0.25,0.125: train %.3f dB, test %.3f dB, gap %.3f (<= %.1f), floor %.0f dB, %.0f s; "
                    "scale 0.5 alone: train %.3f, test %.3f, gap %.3f",
                    r.train.mean_psnr, r.test.mean_psnr, gap, kParityGapDb, kParityFloorDb, runs.clean_multi_s,
                    s.train.mean_psnr, s.test.mean_psnr, std::abs(s.train.mean_psnr - s.test.mean_psnr))};
}

Outcome noise_robustness(const PipelineRuns& runs)
{
    const double drop = runs.clean_multi.test.mean_psnr - runs.noisy_multi.test.mean_psnr;
    const double drop_single = runs.clean_single.test.mean_psnr - runs.noisy_single.test.mean_psnr;
    return {drop <= kNoiseGapDb,
            fmt("scales 0.5,0.25,0.125: test %.3f dB clean, %.3f dB noisy, drop %.3f (<= %.1f); "
                "scale 0.5 alone: %.3f clean, %.3f noisy, drop %.3f",
                runs.clean_multi.test.mean_psnr, runs.noisy_multi.test.mean_psnr, drop, kNoiseGapDb,
                runs.clean_single.test.mean_psnr, runs.noisy_single.test.mean_psnr, drop_single)};
}

Outcome runtime_linearity(const Scene& ref)
{
    const GridSpec base = ref.synthetic.spec.grid.at_scale(0.25);
    // A second layer of blocks stacked on top; every camera sees it.
    GridSpec doubled = base;
    doubled.extent.z() *= 2.0;
    const CarveParams params = CarveParams::defaults_for(0.25);
    auto median_time = [&](const GridSpec& g, std::size_t& blocks) {
        std::vector<double> t;
        for (int i = 0; i < kLinearityRuns; ++i) {
            const CarveResult r = carve_scene(ref.frames, ref.synthetic.camera, g, params);
            t.push_back(r.stats.total_s);
            blocks = r.stats.blocks;
        }
        std::ranges::sort(t);
        return t[t.size() / 2];
    };
    std::size_t b1 = 0;
    std::size_t b2 = 0;
    const double t1 = median_time(base, b1);
    const double t2 = median_time(doubled, b2);
    const double ratio = t2 / t1;
    return {b2 == 2 * b1 && ratio <= kLinearityRatio,
            fmt("%zu blocks %.3f s, %zu blocks %.3f s (median of %d), ratio %.3f (<= %.1f)", b1, t1, b2, t2,
                kLinearityRuns, ratio, kLinearityRatio)};
}

Outcome psnr_closed_forms()
{
    RgbImage a(64, 48, Rgb8{100, 150, 200});
    RgbImage b(64, 48, Rgb8{105, 155, 205});
    const double offset = psnr(b, a);
    const double same = psnr(a, a);
    RgbImage board(64, 48);
    RgbImage inverse(64, 48);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 64; ++x) {
            const std::uint8_t v = (x + y) % 2 ? 255 : 0;
            board(x, y) = Rgb8{v, v, v};
            const auto w = static_cast<std::uint8_t>(255 - v);
            inverse(x, y) = Rgb8{w, w, w};
        }
    }
    const double checker = psnr(board, inverse);
    const bool ok = std::abs(offset - kPsnrOffsetDb) <= kPsnrOffsetTolerance && std::isinf(same) && same > 0.0 &&
                    checker == 0.0;
    return {ok, fmt("+5 offset %.4f dB (%.2f +/- %.2f), identical %g, checkerboard %g dB", offset, kPsnrOffsetDb,
                    kPsnrOffsetTolerance, same, checker)};
}

} // namespace

int main()
{
    int failures = 0;
    auto report = [&](const char* name, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    };

    const SyntheticSpec spec = SyntheticSpec::reference();
    const Scene ref = make_scene(spec);

    PipelineRuns runs;
    bool runs_ok = true;
    std::string runs_error;
    try {
        SyntheticSpec noisy = spec;
        noisy.noise.pose_sigma = 0.5;
        noisy.noise.depth_sigma = 0.02;
        const SyntheticScene noisy_scene = generate_synthetic(noisy);
        const auto t0 = std::chrono::steady_clock::now();
        runs.clean_multi = run(ref.synthetic, {0.5, 0.25, 0.125}, "accept_clean");
        runs.clean_multi_s = seconds_since(t0);
        runs.noisy_multi = run(noisy_scene, {0.5, 0.25, 0.125}, "accept_noisy");
        runs.clean_single = run(ref.synthetic, {0.5}, "accept_clean_single");
        runs.noisy_single = run(noisy_scene, {0.5}, "accept_noisy_single");
    } catch (const std::exception& e) {
        runs_ok = false;
        runs_error = e.what();
    }
    auto needs_runs = [&](Outcome (*fn)(const PipelineRuns&)) {
        return [&, fn] { return runs_ok ? fn(runs) : Outcome{false, "pipeline failed: " + runs_error}; };
    };

    report("oracle equivalence", oracle_equivalence);
    report("block invariance", [&] { return block_invariance(ref); });
    report("normalization", [&] { return normalization(ref); });
    report("analytic weights", analytic_weights);
    report("HSV bin round trip", hsv_round_trip);
    report("render correctness", render_correctness);
    report("multi-scale monotone coverage", needs_runs(coverage));
    report("train/test parity", needs_runs(parity));
    report("noise robustness", needs_runs(noise_robustness));
    report("runtime linearity", [&] { return runtime_linearity(ref); });
    report("PSNR closed forms", psnr_closed_forms);

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
