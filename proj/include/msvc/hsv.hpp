#pragma once

// HSV color quantization used for color-consistency voting.
//
// Hue is split into 15 bins of 24 degrees, saturation and value into 10 bins
// of 0.1 each, for 1500 bins in total. The linear bin index is
// hue_bin * 100 + sat_bin * 10 + val_bin.

#include "msvc/image.hpp"

#include <array>
#include <cstdint>

namespace msvc {

inline constexpr int kHueBins = 15;
inline constexpr int kSatBins = 10;
inline constexpr int kValBins = 10;
inline constexpr int kBinCount = kHueBins * kSatBins * kValBins;

using BinIndex = std::uint16_t;

/// H in degrees [0, 360), S and V in [0, 1].
struct Hsv {
    double h = 0.0;
    double s = 0.0;
    double v = 0.0;
};

/// Standard hexcone conversion of 8-bit sRGB values scaled to [0, 1]; no
/// gamma linearization. Gray pixels get H = 0.
Hsv rgb_to_hsv(Rgb8 rgb) noexcept;

/// Continuous HSV -> RGB in [0, 1].
std::array<double, 3> hsv_to_rgb(const Hsv& hsv) noexcept;

/// Rounds each channel of hsv_to_rgb to the nearest 8-bit value.
Rgb8 hsv_to_rgb8(const Hsv& hsv) noexcept;

/// Maps an HSV color to its bin. Throws std::out_of_range for channels
/// outside H in [0, 360), S in [0, 1], V in [0, 1] (including NaN).
int hsv_discretize(const Hsv& hsv);

/// Same as hsv_discretize(rgb_to_hsv(rgb)); never throws.
BinIndex rgb_to_bin(Rgb8 rgb) noexcept;

/// Midpoint of the bin's H, S and V intervals. Throws std::out_of_range.
Hsv bin_to_hsv(int bin);

/// The bin midpoint converted to 8-bit RGB.
Rgb8 bin_to_rgb(int bin);

} // namespace msvc
