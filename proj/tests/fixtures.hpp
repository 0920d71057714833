#pragma once

#include "msvc/carving.hpp"
#include "msvc/dataset.hpp"
#include "msvc/synthetic.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fixture {

/// Five frames of an 10 x 10 m island with one box, 80 x 60 pixels.
msvc::SyntheticSpec toy_spec();

/// 10 x 10 x 10 voxels of 1 m over the toy island, one block.
msvc::GridSpec toy_grid();

struct Scene {
    msvc::SyntheticScene synthetic;
    msvc::SceneDataset dataset;
    std::vector<msvc::FrameObservation> frames;
};

Scene make(const msvc::SyntheticSpec& spec);

/// Fresh empty directory under the system temp path.
std::filesystem::path temp_dir(const std::string& name);

} // namespace fixture
