// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/types.hpp"

#include <cmath>

namespace amodal {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw Error(ErrorKind::BadArgument, "image dimensions must be >= 1");
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
        pixels_[i] = fill.r;
        pixels_[i + 1] = fill.g;
        pixels_[i + 2] = fill.b;
    }
}

Image::Image(int width, int height, std::vector<std::uint8_t> rgb_pixels)
    : width_(width), height_(height), pixels_(std::move(rgb_pixels)) {
    if (width < 1 || height < 1)
        throw Error(ErrorKind::BadArgument, "image dimensions must be >= 1");
    if (pixels_.size() != static_cast<std::size_t>(width) * height * 3)
        throw Error(ErrorKind::BadArgument, "pixel buffer size does not match dimensions");
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    if (width < 1 || height < 1)
        throw Error(ErrorKind::BadArgument, "mask dimensions must be >= 1");
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
    std::size_t n = 0;
    for (std::uint8_t b : bits_) n += b;
    return n;
}

double BinaryMask::Box::diagonal() const noexcept {
    if (!valid()) return 0.0;
    const double w = x1 - x0 + 1;
    const double h = y1 - y0 + 1;
    return std::sqrt(w * w + h * h);
}

BinaryMask::Box BinaryMask::bounding_box() const noexcept {
    Box box;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            if (!bits_[static_cast<std::size_t>(y) * width_ + x]) continue;
            if (!box.valid()) {
                box = {x, y, x, y};
            } else {
                if (x < box.x0) box.x0 = x;
                if (y < box.y0) box.y0 = y;
                if (x > box.x1) box.x1 = x;
                if (y > box.y1) box.y1 = y;
            }
        }
    }
    return box;
}

void Expansion::validate(double ceiling) const {
    for (double v : {top, bottom, left, right}) {
        if (!(v >= 0.0)) throw Error(ErrorKind::BadArgument, "expansion ratios must be >= 0");
        if (v > ceiling)
            throw Error(ErrorKind::ExpansionTooLarge,
                        "expansion ratio " + std::to_string(v) + " exceeds ceiling " +
                            std::to_string(ceiling));
    }
}

std::vector<std::string> validate_plan(const CompletionPlan& plan) {
    std::vector<std::string> violations;
    const bool mask_dims_ok = plan.inpaint_mask.width() == plan.input_composite.width() &&
                              plan.inpaint_mask.height() == plan.input_composite.height();
    if (!mask_dims_ok) violations.push_back("dim_mismatch_mask");
    const bool visible_dims_ok = plan.visible_mask.width() == plan.input_composite.width() &&
                                 plan.visible_mask.height() == plan.input_composite.height();
    if (!visible_dims_ok) violations.push_back("dim_mismatch_visible");
    if (mask_dims_ok && visible_dims_ok) {
        for (int y = 0; y < plan.inpaint_mask.height(); ++y) {
            bool overlap = false;
            for (int x = 0; x < plan.inpaint_mask.width(); ++x) {
                if (plan.inpaint_mask.at(x, y) && plan.visible_mask.at(x, y)) {
                    violations.push_back("mask_overlaps_visible");
                    overlap = true;
                    break;
                }
            }
            if (overlap) break;
        }
    }
    if (plan.description.empty()) violations.push_back("empty_description");
    if (plan.offset_x < 0 || plan.offset_y < 0 ||
        plan.offset_x >= plan.input_composite.width() ||
        plan.offset_y >= plan.input_composite.height())
        violations.push_back("bad_offset");
    return violations;
}

}  // namespace amodal
