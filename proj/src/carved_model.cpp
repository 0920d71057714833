#include "msvc/carved_model.hpp"

#include "msvc/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace msvc {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'S', 'V', 'C'};

template <typename T>
void put_le(std::ostream& out, T value)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = std::bit_cast<U>(value);
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const fs::path& path)
{
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in) {
        throw Error("'" + path.string() + "': truncated model file");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bits |= static_cast<U>(bytes[i]) << (8 * i);
    }
    return std::bit_cast<T>(bits);
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, mode);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    return out;
}

} // namespace

void write_model(const fs::path& path, const CarvedModel& model)
{
    std::ofstream out = open_out(path, std::ios::binary);
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kModelFormatVersion);
    put_le<double>(out, model.voxel_size);
    put_le<std::uint64_t>(out, model.voxels.size());
    for (const auto& v : model.voxels) {
        put_le<double>(out, v.center.x());
        put_le<double>(out, v.center.y());
        put_le<double>(out, v.center.z());
        const std::array<char, 3> rgb = {static_cast<char>(v.color.r), static_cast<char>(v.color.g),
                                         static_cast<char>(v.color.b)};
        out.write(rgb.data(), rgb.size());
    }
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

CarvedModel read_model(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw Error("'" + path.string() + "' is not a carved model (bad magic)");
    }
    const auto version = get_le<std::uint32_t>(in, path);
    if (version != kModelFormatVersion) {
        throw Error("'" + path.string() + "': unsupported model version " + std::to_string(version));
    }
    CarvedModel model;
    model.voxel_size = get_le<double>(in, path);
    const auto count = get_le<std::uint64_t>(in, path);

    // Guard against absurd counts before reserving.
    const auto here = in.tellg();
    in.seekg(0, std::ios::end);
    const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
    in.seekg(here);
    if (remaining != count * 27) {
        throw Error("'" + path.string() + "': voxel count does not match file size");
    }
    model.voxels.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        ModelVoxel v;
        v.center.x() = get_le<double>(in, path);
        v.center.y() = get_le<double>(in, path);
        v.center.z() = get_le<double>(in, path);
        std::array<unsigned char, 3> rgb{};
        in.read(reinterpret_cast<char*>(rgb.data()), rgb.size());
        v.color = {rgb[0], rgb[1], rgb[2]};
        model.voxels.push_back(v);
    }
    if (!in) {
        throw Error("'" + path.string() + "': truncated model file");
    }
    return model;
}

void write_model_text(const fs::path& path, const CarvedModel& model)
{
    std::ofstream out = open_out(path, std::ios::out);
    out << std::setprecision(17);
    for (const auto& v : model.voxels) {
        out << v.center.x() << ' ' << v.center.y() << ' ' << v.center.z() << ' ' << int(v.color.r) << ' '
            << int(v.color.g) << ' ' << int(v.color.b) << '\n';
    }
}

} // namespace msvc
