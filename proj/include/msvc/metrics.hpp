#pragma once

#include "msvc/image.hpp"

namespace msvc {

/// Mean squared error over all three channels of every pixel.
double mse(const RgbImage& pred, const RgbImage& truth);

/// 10 * log10(255^2 / MSE). Identical images give +infinity.
double psnr(const RgbImage& pred, const RgbImage& truth);

/// PSNR restricted to pixels where `excluded` is zero (e.g. a render's
/// empty mask). Throws when every pixel is excluded.
double psnr_unmasked(const RgbImage& pred, const RgbImage& truth, const MaskImage& excluded);

} // namespace msvc
