#include "msvc/metrics.hpp"

#include "msvc/error.hpp"

#include <cmath>
#include <limits>

namespace msvc {

namespace {

void check_sizes(const RgbImage& a, const RgbImage& b)
{
    if (!a.same_size(b)) {
        throw Error("psnr: image sizes differ (" + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                    " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) + ")");
    }
}

// Exact integer sum of squared channel errors.
std::uint64_t squared_error(Rgb8 a, Rgb8 b) noexcept
{
    const int dr = int(a.r) - int(b.r);
    const int dg = int(a.g) - int(b.g);
    const int db = int(a.b) - int(b.b);
    return static_cast<std::uint64_t>(dr * dr + dg * dg + db * db);
}

double psnr_from(std::uint64_t sse, std::size_t samples)
{
    if (sse == 0) {
        return std::numeric_limits<double>::infinity();
    }
    const double m = static_cast<double>(sse) / static_cast<double>(samples);
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

} // namespace

double mse(const RgbImage& pred, const RgbImage& truth)
{
    check_sizes(pred, truth);
    std::uint64_t sse = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sse += squared_error(pred[i], truth[i]);
    }
    return pred.empty() ? 0.0 : static_cast<double>(sse) / static_cast<double>(3 * pred.size());
}

double psnr(const RgbImage& pred, const RgbImage& truth)
{
    check_sizes(pred, truth);
    if (pred.empty()) {
        throw Error("psnr: empty images");
    }
    std::uint64_t sse = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sse += squared_error(pred[i], truth[i]);
    }
    return psnr_from(sse, 3 * pred.size());
}

double psnr_unmasked(const RgbImage& pred, const RgbImage& truth, const MaskImage& excluded)
{
    check_sizes(pred, truth);
    if (!excluded.same_size(pred)) {
        throw Error("psnr: mask size differs from image size");
    }
    std::uint64_t sse = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (excluded[i]) {
            continue;
        }
        sse += squared_error(pred[i], truth[i]);
        ++count;
    }
    if (count == 0) {
        throw Error("psnr: every pixel is masked");
    }
    return psnr_from(sse, 3 * count);
}

} // namespace msvc
