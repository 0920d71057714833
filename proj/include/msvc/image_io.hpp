#pragma once

#include "msvc/image.hpp"

#include <cstdint>
#include <filesystem>

namespace msvc {

struct ImageSize {
    int width = 0;
    int height = 0;
};

RgbImage read_png_rgb(const std::filesystem::path& path);
void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);

/// 8-bit grayscale. Masks are written 255 = empty, 0 = covered.
MaskImage read_png_gray8(const std::filesystem::path& path);
void write_png_gray8(const std::filesystem::path& path, const MaskImage& image);

Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path);
void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image);

/// Reads only the header of a PNG or PFM file.
ImageSize probe_image_size(const std::filesystem::path& path);

/// Single-channel portable float map, little-endian ("Pf", scale -1).
/// Rows are stored bottom-to-top on disk as the format requires.
DepthImage read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const DepthImage& image);

/// Depth in meters from a PFM file or a 16-bit PNG holding millimeters.
/// Zero in a PNG stays zero (no measurement).
DepthImage read_depth(const std::filesystem::path& path);

/// Writes 0/1 masks as 0/255 PNG.
void write_mask_png(const std::filesystem::path& path, const MaskImage& mask);
MaskImage read_mask_png(const std::filesystem::path& path);

} // namespace msvc
