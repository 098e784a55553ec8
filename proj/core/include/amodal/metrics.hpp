// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "amodal/types.hpp"

namespace amodal {

/// BT.601 luma of an RGB image, one double per pixel in [0, 255].
std::vector<double> to_luma(const Image& image);

/// Windowed SSIM on luma: 8x8 box window, stride 1,
/// C1 = (0.01*255)^2, C2 = (0.03*255)^2, mean over all window positions.
/// Throws TooSmall when either side is below the window size.
double ssim(const Image& a, const Image& b);

/// 10*log10(255^2 / MSE) over all channels; +infinity for identical images.
double psnr(const Image& a, const Image& b);

double mse(const Image& a, const Image& b);

}  // namespace amodal
