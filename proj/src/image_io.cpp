#include "msvc/image_io.hpp"

#include "msvc/error.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace msvc {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode)
{
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw Error("cannot open '" + path.string() + "'");
    }
    return f;
}

struct PngImage {
    png_image img{};
    PngImage()
    {
        std::memset(&img, 0, sizeof(img));
        img.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&img); }
};

template <typename T>
std::vector<T> decode_png(const fs::path& path, png_uint_32 format, int& width, int& height)
{
    if (!fs::exists(path)) {
        throw Error("missing file '" + path.string() + "'");
    }
    PngImage p;
    if (!png_image_begin_read_from_file(&p.img, path.c_str())) {
        throw Error("'" + path.string() + "': " + p.img.message);
    }
    p.img.format = format;
    std::vector<T> buffer(PNG_IMAGE_SIZE(p.img) / sizeof(T));
    if (!png_image_finish_read(&p.img, nullptr, buffer.data(), 0, nullptr)) {
        throw Error("'" + path.string() + "': " + p.img.message);
    }
    width = static_cast<int>(p.img.width);
    height = static_cast<int>(p.img.height);
    return buffer;
}

void encode_png(const fs::path& path, int width, int height, png_uint_32 format, const void* data)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    PngImage p;
    p.img.width = static_cast<png_uint_32>(width);
    p.img.height = static_cast<png_uint_32>(height);
    p.img.format = format;
    if (!png_image_write_to_file(&p.img, path.c_str(), 0, data, 0, nullptr)) {
        throw Error("cannot write '" + path.string() + "': " + p.img.message);
    }
}

bool has_extension(const fs::path& path, const char* ext)
{
    std::string e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

struct PfmHeader {
    int width = 0;
    int height = 0;
    bool little_endian = true;
};

PfmHeader read_pfm_header(std::istream& in, const fs::path& path)
{
    std::string magic;
    double scale = 0.0;
    PfmHeader h;
    in >> magic >> h.width >> h.height >> scale;
    if (!in || magic != "Pf") {
        throw Error("'" + path.string() + "' is not a single-channel PFM file");
    }
    if (h.width <= 0 || h.height <= 0 || scale == 0.0) {
        throw Error("'" + path.string() + "': bad PFM header");
    }
    in.get(); // single whitespace before the raster
    h.little_endian = scale < 0.0;
    return h;
}

} // namespace

RgbImage read_png_rgb(const fs::path& path)
{
    int w = 0;
    int h = 0;
    const auto raw = decode_png<std::uint8_t>(path, PNG_FORMAT_RGB, w, h);
    RgbImage img(w, h);
    std::memcpy(img.pixels().data(), raw.data(), img.size() * 3);
    return img;
}

void write_png_rgb(const fs::path& path, const RgbImage& image)
{
    static_assert(sizeof(Rgb8) == 3);
    encode_png(path, image.width(), image.height(), PNG_FORMAT_RGB, image.pixels().data());
}

MaskImage read_png_gray8(const fs::path& path)
{
    int w = 0;
    int h = 0;
    auto raw = decode_png<std::uint8_t>(path, PNG_FORMAT_GRAY, w, h);
    MaskImage img(w, h);
    std::memcpy(img.pixels().data(), raw.data(), img.size());
    return img;
}

void write_png_gray8(const fs::path& path, const MaskImage& image)
{
    encode_png(path, image.width(), image.height(), PNG_FORMAT_GRAY, image.pixels().data());
}

// 16-bit files are treated as linear by libpng's simplified API, so the
// samples come back unchanged.
Image<std::uint16_t> read_png_gray16(const fs::path& path)
{
    int w = 0;
    int h = 0;
    auto raw = decode_png<std::uint16_t>(path, PNG_FORMAT_LINEAR_Y, w, h);
    Image<std::uint16_t> img(w, h);
    std::memcpy(img.pixels().data(), raw.data(), img.size() * 2);
    return img;
}

void write_png_gray16(const fs::path& path, const Image<std::uint16_t>& image)
{
    encode_png(path, image.width(), image.height(), PNG_FORMAT_LINEAR_Y, image.pixels().data());
}

ImageSize probe_image_size(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw Error("missing file '" + path.string() + "'");
    }
    if (has_extension(path, ".pfm")) {
        std::ifstream in(path, std::ios::binary);
        const PfmHeader h = read_pfm_header(in, path);
        return {h.width, h.height};
    }
    FilePtr file = open_file(path, "rb");
    std::array<png_byte, 24> head{};
    if (std::fread(head.data(), 1, head.size(), file.get()) != head.size() || png_sig_cmp(head.data(), 0, 8) != 0) {
        throw Error("'" + path.string() + "' is neither PNG nor PFM");
    }
    auto be32 = [&](std::size_t off) {
        return static_cast<int>((head[off] << 24) | (head[off + 1] << 16) | (head[off + 2] << 8) | head[off + 3]);
    };
    return {be32(16), be32(20)};
}

DepthImage read_pfm(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    const PfmHeader h = read_pfm_header(in, path);
    DepthImage img(h.width, h.height);
    std::vector<std::uint32_t> row(static_cast<std::size_t>(h.width));
    for (int y = h.height - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
        if (!in) {
            throw Error("'" + path.string() + "': truncated PFM raster");
        }
        for (int x = 0; x < h.width; ++x) {
            std::uint32_t bits = row[static_cast<std::size_t>(x)];
            if (h.little_endian != (std::endian::native == std::endian::little)) {
                bits = __builtin_bswap32(bits);
            }
            img(x, y) = std::bit_cast<float>(bits);
        }
    }
    return img;
}

void write_pfm(const fs::path& path, const DepthImage& image)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
    std::vector<std::uint32_t> row(static_cast<std::size_t>(image.width()));
    for (int y = image.height() - 1; y >= 0; --y) {
        for (int x = 0; x < image.width(); ++x) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(image(x, y));
            if constexpr (std::endian::native != std::endian::little) {
                bits = __builtin_bswap32(bits);
            }
            row[static_cast<std::size_t>(x)] = bits;
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    }
}

DepthImage read_depth(const fs::path& path)
{
    if (has_extension(path, ".pfm")) {
        return read_pfm(path);
    }
    if (has_extension(path, ".png")) {
        const Image<std::uint16_t> mm = read_png_gray16(path);
        DepthImage img(mm.width(), mm.height());
        for (std::size_t i = 0; i < mm.size(); ++i) {
            img[i] = static_cast<float>(mm[i]) / 1000.0f;
        }
        return img;
    }
    throw Error("unsupported depth format '" + path.string() + "' (expected .pfm or 16-bit .png)");
}

void write_mask_png(const fs::path& path, const MaskImage& mask)
{
    MaskImage out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) {
        out[i] = mask[i] ? 255 : 0;
    }
    write_png_gray8(path, out);
}

MaskImage read_mask_png(const fs::path& path)
{
    MaskImage m = read_png_gray8(path);
    for (auto& v : m.pixels()) {
        v = v >= 128 ? 1 : 0;
    }
    return m;
}

} // namespace msvc
