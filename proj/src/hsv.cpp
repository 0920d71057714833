#include "msvc/hsv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace msvc {

namespace {

constexpr double kHueWidth = 360.0 / kHueBins;

int clamp_bin(double scaled, int count) noexcept
{
    return std::min(static_cast<int>(std::floor(scaled)), count - 1);
}

int bin_of(const Hsv& hsv) noexcept
{
    const int hb = clamp_bin(hsv.h / kHueWidth, kHueBins);
    const int sb = clamp_bin(hsv.s * kSatBins, kSatBins);
    const int vb = clamp_bin(hsv.v * kValBins, kValBins);
    return hb * (kSatBins * kValBins) + sb * kValBins + vb;
}

} // namespace

Hsv rgb_to_hsv(Rgb8 rgb) noexcept
{
    const int r = rgb.r;
    const int g = rgb.g;
    const int b = rgb.b;
    const int mx = std::max({r, g, b});
    const int mn = std::min({r, g, b});
    const int delta = mx - mn;

    Hsv out;
    out.v = mx / 255.0;
    out.s = mx == 0 ? 0.0 : static_cast<double>(delta) / mx;
    if (delta == 0) {
        out.h = 0.0;
        return out;
    }
    double h = 0.0;
    if (mx == r) {
        h = 60.0 * static_cast<double>(g - b) / delta;
    } else if (mx == g) {
        h = 60.0 * (2.0 + static_cast<double>(b - r) / delta);
    } else {
        h = 60.0 * (4.0 + static_cast<double>(r - g) / delta);
    }
    if (h < 0.0) {
        h += 360.0;
    }
    out.h = h >= 360.0 ? 0.0 : h;
    return out;
}

std::array<double, 3> hsv_to_rgb(const Hsv& hsv) noexcept
{
    const double c = hsv.v * hsv.s;
    const double hp = hsv.h / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    const double m = hsv.v - c;
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
    }
    return {r + m, g + m, b + m};
}

Rgb8 hsv_to_rgb8(const Hsv& hsv) noexcept
{
    const auto rgb = hsv_to_rgb(hsv);
    auto to8 = [](double u) {
        return static_cast<std::uint8_t>(std::clamp(std::lround(u * 255.0), 0L, 255L));
    };
    return {to8(rgb[0]), to8(rgb[1]), to8(rgb[2])};
}

int hsv_discretize(const Hsv& hsv)
{
    if (!(hsv.h >= 0.0 && hsv.h < 360.0) || !(hsv.s >= 0.0 && hsv.s <= 1.0) || !(hsv.v >= 0.0 && hsv.v <= 1.0)) {
        throw std::out_of_range("hsv_discretize: channel out of range (H=" + std::to_string(hsv.h) +
                                ", S=" + std::to_string(hsv.s) + ", V=" + std::to_string(hsv.v) + ")");
    }
    return bin_of(hsv);
}

BinIndex rgb_to_bin(Rgb8 rgb) noexcept
{
    return static_cast<BinIndex>(bin_of(rgb_to_hsv(rgb)));
}

Hsv bin_to_hsv(int bin)
{
    if (bin < 0 || bin >= kBinCount) {
        throw std::out_of_range("bin index " + std::to_string(bin) + " outside [0, 1500)");
    }
    const int hb = bin / (kSatBins * kValBins);
    const int sb = (bin / kValBins) % kSatBins;
    const int vb = bin % kValBins;
    return {(hb + 0.5) * kHueWidth, (sb + 0.5) / kSatBins, (vb + 0.5) / kValBins};
}

Rgb8 bin_to_rgb(int bin)
{
    return hsv_to_rgb8(bin_to_hsv(bin));
}

} // namespace msvc
