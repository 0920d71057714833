// Serial reference vs OpenMP kernels on the reference synthetic scene.

#include "msvc/carving.hpp"
#include "msvc/renderer.hpp"
#include "msvc/synthetic.hpp"

#include <benchmark/benchmark.h>

using namespace msvc;

namespace {

struct Fixture {
    SyntheticScene scene;
    std::vector<FrameObservation> frames;
    GridSpec grid;
    CarveParams params;
    CarvedModel model;

    static const Fixture& get()
    {
        static const Fixture f = [] {
            Fixture x;
            SyntheticSpec spec = SyntheticSpec::reference();
            spec.frames = 8;
            x.scene = generate_synthetic(spec);
            SceneDataset ds = dataset_from(x.scene);
            for (auto& r : ds.frames) {
                r.split = Split::train;
            }
            x.frames = observations_from(x.scene, ds, Split::train);
            x.grid = spec.grid.at_scale(0.25);
            x.params = CarveParams::defaults_for(0.25);
            x.model = carve_scene(x.frames, x.scene.camera, x.grid, x.params).model;
            return x;
        }();
        return f;
    }
};

void accumulate(benchmark::State& state, Exec exec)
{
    const Fixture& f = Fixture::get();
    const BlockRange range = f.grid.blocks()[5];
    for (auto _ : state) {
        VoxelBlock block(f.grid, range);
        for (const auto& frame : f.frames) {
            accumulate_frame(block, frame, f.scene.camera, f.params, exec);
        }
        benchmark::DoNotOptimize(block.seen().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(range.voxel_count() * f.frames.size()));
}

void render_view(benchmark::State& state, Exec exec)
{
    const Fixture& f = Fixture::get();
    RenderOptions o;
    o.exec = exec;
    for (auto _ : state) {
        RenderedView v = render(f.model, f.scene.frames[3].true_pose, f.scene.camera, o);
        benchmark::DoNotOptimize(v.rgb.pixels().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.model.voxels.size()));
}

} // namespace

BENCHMARK_CAPTURE(accumulate, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(accumulate, omp, Exec::parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(render_view, serial, Exec::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(render_view, omp, Exec::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
