#include "fixtures.hpp"

#include <unistd.h>

namespace fixture {

msvc::SyntheticSpec toy_spec()
{
    msvc::SyntheticSpec spec;
    spec.width = 80;
    spec.height = 60;
    spec.focal = 70.0;
    spec.frames = 5;
    spec.altitude = 20.0;
    spec.orbit_radius = 6.0;
    spec.altitude_wobble = 1.0;
    spec.half_size = 5.0;
    spec.tile = 2.0;
    const auto& pal = msvc::synthetic_palette();
    spec.boxes = {{msvc::Vec3(-2.0, -1.0, 0.0), msvc::Vec3(1.0, 2.0, 3.0), pal[3], pal[8]}};
    spec.grid = {msvc::Vec3(-5.0, -5.0, -2.0), msvc::Vec3(10.0, 10.0, 10.0), msvc::Vec3(10.0, 10.0, 10.0)};
    spec.reference_voxel_size = 1.0;
    return spec;
}

msvc::GridSpec toy_grid()
{
    return toy_spec().grid.at_scale(1.0);
}

Scene make(const msvc::SyntheticSpec& spec)
{
    Scene s;
    s.synthetic = msvc::generate_synthetic(spec);
    s.dataset = msvc::dataset_from(s.synthetic);
    for (auto& f : s.dataset.frames) {
        f.split = msvc::Split::train;
    }
    s.frames = msvc::observations_from(s.synthetic, s.dataset, msvc::Split::train);
    return s;
}

std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("msvc_test_" + std::to_string(::getpid())) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace fixture
