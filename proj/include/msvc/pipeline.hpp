#pragma once

// Carve -> render -> blend -> evaluate, with on-disk outputs.
//
// Output layout under the chosen directory:
//
//   models/model_<s>.msvc              carved model per voxel size <s>
//   scale_<s>/NNNNNN.png               render at one scale, void color where empty
//   scale_<s>/NNNNNN_mask.png          255 = empty
//   scale_<s>/NNNNNN_depth.pfm         z-buffer, +inf where empty
//   blend/NNNNNN.png, NNNNNN_mask.png  finest-first composite
//   report.txt, report.json            see docs/report.md
//   FAILED                             written only when a stage throws
//
// NNNNNN is the zero-padded frame id.

#include "msvc/carved_model.hpp"
#include "msvc/carving.hpp"
#include "msvc/dataset.hpp"
#include "msvc/renderer.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace msvc {

/// Parameters the user pinned explicitly; everything else follows
/// CarveParams::defaults_for(voxel_size).
struct ParamOverrides {
    std::optional<double> eps_seen;
    std::optional<int> seen_threshold;
    std::optional<double> alpha;
    std::optional<double> sigma;
    std::optional<double> eps_hsv;
    std::optional<double> max_distance;

    CarveParams for_scale(double voxel_size) const;
};

struct PipelineOptions {
    std::vector<double> scales{0.5, 0.25, 0.125};
    ParamOverrides overrides;
    std::optional<GridHint> grid; ///< falls back to the scene's grid line
    Exec exec = Exec::parallel;
    /// Applied only when no frame in the scene carries a train/test tag.
    double train_fraction = 0.8;
    int stride = 1;
    bool write_images = true;
};

struct FrameScore {
    int id = 0;
    Split split = Split::none;
    double psnr = 0.0;          ///< full image, empty pixels at the void color
    double psnr_unmasked = 0.0; ///< NaN when every pixel is empty
    double empty_fraction = 0.0;
};

struct ScaleReport {
    double voxel_size = 0.0;
    CarveParams params;
    CarveStats carve;
    double render_s = 0.0;
    double empty_fraction = 0.0; ///< mean over all rendered frames
};

struct SplitSummary {
    std::size_t frames = 0;
    double mean_psnr = 0.0;
    double mean_psnr_unmasked = 0.0; ///< over frames with a finite value
};

struct ImageTiming {
    int frame_id = 0;
    double projection_s = 0.0;
    double colorization_s = 0.0;
    double total_s() const noexcept { return projection_s + colorization_s; }
};

struct EvalReport {
    std::string scene_id;
    std::vector<ScaleReport> scales;
    std::vector<FrameScore> frames;
    SplitSummary train;
    SplitSummary test;
    double blend_empty_fraction = 0.0;
    std::vector<ImageTiming> train_timings; ///< summed over scales
    double total_s = 0.0;

    SplitSummary summary(Split split) const;
};

/// Loads the RGB and depth for one record. The default reads from disk.
using FrameLoader = std::function<LoadedFrame(const FrameRecord&)>;

/// Runs the whole pipeline. Any stage failure is rethrown as a StageError
/// after a FAILED marker is written next to whatever was already flushed.
EvalReport run_pipeline(const SceneDataset& scene, const PipelineOptions& options,
                        const std::filesystem::path& out_dir, const FrameLoader& loader = {});

/// Scores prediction PNGs named NNNNNN.png in `pred_dir` against the scene's
/// RGB frames. Optional NNNNNN_mask.png files drive the unmasked PSNR.
EvalReport evaluate_directory(const SceneDataset& scene, const std::filesystem::path& pred_dir);

/// "0.5" -> "0.5", "0.125" -> "0.125": shortest round-trip text.
std::string scale_tag(double voxel_size);
std::string frame_stem(int id);

void write_view(const std::filesystem::path& dir, int id, const RenderedView& view);
void write_report(const std::filesystem::path& dir, const EvalReport& report);

/// Writes `dir`/FAILED holding "[stage] message".
void write_failed_marker(const std::filesystem::path& dir, const std::string& stage, const std::string& what);

/// Applies split_dataset when the scene carries no split tags.
SceneDataset with_split(const SceneDataset& scene, double train_fraction, int stride);

} // namespace msvc
