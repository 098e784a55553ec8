// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/metrics.hpp"

#include <cmath>
#include <limits>

namespace amodal {

namespace {

constexpr int kWindow = 8;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

// Summed-area table with a one-row/column zero border.
std::vector<double> integral(const std::vector<double>& values, int w, int h) {
    std::vector<double> table(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += values[static_cast<std::size_t>(y) * w + x];
            table[static_cast<std::size_t>(y + 1) * (w + 1) + (x + 1)] =
                table[static_cast<std::size_t>(y) * (w + 1) + (x + 1)] + row;
        }
    }
    return table;
}

double box_sum(const std::vector<double>& table, int w, int x0, int y0, int x1, int y1) {
    const int stride = w + 1;
    return table[static_cast<std::size_t>(y1 + 1) * stride + (x1 + 1)] -
           table[static_cast<std::size_t>(y0) * stride + (x1 + 1)] -
           table[static_cast<std::size_t>(y1 + 1) * stride + x0] +
           table[static_cast<std::size_t>(y0) * stride + x0];
}

}  // namespace

std::vector<double> to_luma(const Image& image) {
    std::vector<double> luma(static_cast<std::size_t>(image.width()) * image.height());
    const auto px = image.pixels();
    for (std::size_t i = 0, j = 0; i < luma.size(); ++i, j += 3)
        luma[i] = 0.299 * px[j] + 0.587 * px[j + 1] + 0.114 * px[j + 2];
    return luma;
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_dims(b)) throw Error(ErrorKind::DimMismatch, "ssim: image dimensions differ");
    const int w = a.width();
    const int h = a.height();
    if (w < kWindow || h < kWindow)
        throw Error(ErrorKind::TooSmall, "ssim: images smaller than the 8x8 window");

    const std::vector<double> la = to_luma(a);
    const std::vector<double> lb = to_luma(b);
    const std::size_t n = la.size();
    std::vector<double> laa(n), lbb(n), lab(n);
    for (std::size_t i = 0; i < n; ++i) {
        laa[i] = la[i] * la[i];
        lbb[i] = lb[i] * lb[i];
        lab[i] = la[i] * lb[i];
    }
    const auto sa = integral(la, w, h);
    const auto sb = integral(lb, w, h);
    const auto saa = integral(laa, w, h);
    const auto sbb = integral(lbb, w, h);
    const auto sab = integral(lab, w, h);

    const double inv_n = 1.0 / (kWindow * kWindow);
    double total = 0.0;
    long windows = 0;
    for (int y = 0; y + kWindow <= h; ++y) {
        for (int x = 0; x + kWindow <= w; ++x) {
            const int x1 = x + kWindow - 1;
            const int y1 = y + kWindow - 1;
            const double mu_a = box_sum(sa, w, x, y, x1, y1) * inv_n;
            const double mu_b = box_sum(sb, w, x, y, x1, y1) * inv_n;
            const double var_a = box_sum(saa, w, x, y, x1, y1) * inv_n - mu_a * mu_a;
            const double var_b = box_sum(sbb, w, x, y, x1, y1) * inv_n - mu_b * mu_b;
            const double cov = box_sum(sab, w, x, y, x1, y1) * inv_n - mu_a * mu_b;
            const double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
            const double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
            total += num / den;
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

double mse(const Image& a, const Image& b) {
    if (!a.same_dims(b)) throw Error(ErrorKind::DimMismatch, "mse: image dimensions differ");
    const auto pa = a.pixels();
    const auto pb = b.pixels();
    double sum = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(pa.size());
}

double psnr(const Image& a, const Image& b) {
    const double err = mse(a, b);
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / err);
}

}  // namespace amodal
