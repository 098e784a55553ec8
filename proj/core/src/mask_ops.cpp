// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/mask_ops.hpp"

#include <algorithm>
#include <cmath>

namespace amodal {

namespace {

void require_same_dims(const BinaryMask& a, const BinaryMask& b, const char* op) {
    if (!a.same_dims(b))
        throw Error(ErrorKind::DimMismatch, std::string(op) + ": mask dimensions differ");
}

std::vector<std::pair<int, int>> element_offsets(const StructuringElement& element) {
    std::vector<std::pair<int, int>> offsets;
    const int r = element.radius;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (element.shape == StructuringElement::Shape::Disk &&
                dx * dx + dy * dy > r * r)
                continue;
            offsets.emplace_back(dx, dy);
        }
    }
    return offsets;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& element) {
    if (element.radius < 0) throw Error(ErrorKind::BadArgument, "dilation radius must be >= 0");
    if (element.radius == 0) return mask;
    const int w = mask.width();
    const int h = mask.height();
    BinaryMask out(w, h);
    const auto offsets = element_offsets(element);
    // Stamp the element footprint over every set pixel; the test oracle runs
    // the opposite per-output-pixel neighborhood scan.
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y)) continue;
            for (const auto& [dx, dy] : offsets) {
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx >= 0 && ny >= 0 && nx < w && ny < h) out.set(nx, ny);
            }
        }
    }
    return out;
}

BinaryMask union_masks(const std::vector<BinaryMask>& masks, int width, int height) {
    if (masks.empty()) {
        if (width < 1 || height < 1)
            throw Error(ErrorKind::BadArgument, "union of empty list needs explicit dims");
        return BinaryMask(width, height);
    }
    BinaryMask out = masks.front();
    for (std::size_t i = 1; i < masks.size(); ++i) {
        require_same_dims(out, masks[i], "union");
        auto& bits = out.raw();
        const auto other = masks[i].bits();
        for (std::size_t j = 0; j < bits.size(); ++j) bits[j] |= other[j];
    }
    return out;
}

BinaryMask intersect_masks(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "intersect");
    BinaryMask out = a;
    auto& bits = out.raw();
    const auto other = b.bits();
    for (std::size_t j = 0; j < bits.size(); ++j) bits[j] &= other[j];
    return out;
}

BinaryMask difference(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "difference");
    BinaryMask out = a;
    auto& bits = out.raw();
    const auto other = b.bits();
    for (std::size_t j = 0; j < bits.size(); ++j) bits[j] &= static_cast<std::uint8_t>(!other[j]);
    return out;
}

bool contains(const BinaryMask& outer, const BinaryMask& inner) {
    require_same_dims(outer, inner, "contains");
    const auto a = outer.bits();
    const auto b = inner.bits();
    for (std::size_t j = 0; j < a.size(); ++j)
        if (b[j] && !a[j]) return false;
    return true;
}

BinaryMask translate(const BinaryMask& mask, int dx, int dy, int new_width, int new_height) {
    BinaryMask out(new_width, new_height);
    for (int y = 0; y < mask.height(); ++y) {
        const int ny = y + dy;
        if (ny < 0 || ny >= new_height) continue;
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            const int nx = x + dx;
            if (nx >= 0 && nx < new_width) out.set(nx, ny);
        }
    }
    return out;
}

CanvasExpansion expand_canvas(int width, int height, const Expansion& e, double ceiling) {
    if (width < 1 || height < 1)
        throw Error(ErrorKind::BadArgument, "canvas dimensions must be >= 1");
    e.validate(ceiling);
    CanvasExpansion out;
    const int pad_left = static_cast<int>(std::lround(e.left * width));
    const int pad_right = static_cast<int>(std::lround(e.right * width));
    const int pad_top = static_cast<int>(std::lround(e.top * height));
    const int pad_bottom = static_cast<int>(std::lround(e.bottom * height));
    out.width = width + pad_left + pad_right;
    out.height = height + pad_top + pad_bottom;
    out.offset_x = pad_left;
    out.offset_y = pad_top;
    out.expansion_mask = BinaryMask(out.width, out.height, true);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
            out.expansion_mask.set(x + pad_left, y + pad_top, false);
    return out;
}

BinaryMask build_inpaint_mask(const std::vector<BinaryMask>& occluder_masks,
                              const std::vector<StructuringElement>& elements,
                              const BinaryMask& expansion_mask, int offset_x, int offset_y) {
    if (elements.size() != occluder_masks.size())
        throw Error(ErrorKind::BadArgument, "one structuring element per occluder mask");
    BinaryMask out = expansion_mask;
    for (std::size_t i = 0; i < occluder_masks.size(); ++i) {
        if (i > 0) require_same_dims(occluder_masks[i], occluder_masks[0], "build_inpaint_mask");
        const BinaryMask dilated = dilate(occluder_masks[i], elements[i]);
        const BinaryMask placed =
            translate(dilated, offset_x, offset_y, out.width(), out.height());
        out = union_masks({out, placed});
    }
    return out;
}

BinaryMask build_inpaint_mask(const std::vector<BinaryMask>& occluder_masks,
                              const StructuringElement& element,
                              const BinaryMask& expansion_mask, int offset_x, int offset_y) {
    return build_inpaint_mask(occluder_masks,
                              std::vector<StructuringElement>(occluder_masks.size(), element),
                              expansion_mask, offset_x, offset_y);
}

Image white_out(const Image& image, const std::vector<BinaryMask>& masks) {
    Image out = image;
    if (masks.empty()) return out;
    const BinaryMask merged = union_masks(masks);
    if (merged.width() != image.width() || merged.height() != image.height())
        throw Error(ErrorKind::DimMismatch, "white_out: mask dimensions differ from image");
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (merged.at(x, y)) out.set(x, y, kWhite);
    return out;
}

ComposedInput compose_input(const Image& image, const BinaryMask& visible, const Expansion& e,
                            Rgb background, double ceiling) {
    if (visible.width() != image.width() || visible.height() != image.height())
        throw Error(ErrorKind::DimMismatch, "compose_input: visible mask dims differ from image");
    const CanvasExpansion canvas = expand_canvas(image.width(), image.height(), e, ceiling);
    ComposedInput out;
    out.composite = Image(canvas.width, canvas.height, background);
    out.offset_x = canvas.offset_x;
    out.offset_y = canvas.offset_y;
    out.expansion = e;
    out.visible_translated =
        translate(visible, canvas.offset_x, canvas.offset_y, canvas.width, canvas.height);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (visible.at(x, y))
                out.composite.set(x + canvas.offset_x, y + canvas.offset_y, image.at(x, y));
    return out;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b, "iou");
    std::size_t inter = 0, uni = 0;
    const auto pa = a.bits();
    const auto pb = b.bits();
    for (std::size_t j = 0; j < pa.size(); ++j) {
        inter += pa[j] & pb[j];
        uni += pa[j] | pb[j];
    }
    if (uni == 0) return 1.0;  // agreement on absence
    return static_cast<double>(inter) / static_cast<double>(uni);
}

Image composite_over(const Image& outside, const Image& inside, const BinaryMask& mask) {
    if (!outside.same_dims(inside) || mask.width() != outside.width() ||
        mask.height() != outside.height())
        throw Error(ErrorKind::DimMismatch, "composite_over: dimensions differ");
    Image out = outside;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (mask.at(x, y)) out.set(x, y, inside.at(x, y));
    return out;
}

std::pair<Image, double> resize_max_side(const Image& image, int max_side) {
    const int longest = std::max(image.width(), image.height());
    if (max_side < 1 || longest <= max_side) return {image, 1.0};
    const double scale = static_cast<double>(max_side) / longest;
    const int nw = std::max(1, static_cast<int>(std::lround(image.width() * scale)));
    const int nh = std::max(1, static_cast<int>(std::lround(image.height() * scale)));
    Image out(nw, nh);
    for (int y = 0; y < nh; ++y) {
        const int sy = std::min(image.height() - 1, static_cast<int>(y / scale));
        for (int x = 0; x < nw; ++x) {
            const int sx = std::min(image.width() - 1, static_cast<int>(x / scale));
            out.set(x, y, image.at(sx, sy));
        }
    }
    return {out, scale};
}

int proportional_radius(const BinaryMask& occluder, int min_radius, double diag_fraction) {
    const double diag = occluder.bounding_box().diagonal();
    const int proportional = static_cast<int>(std::lround(diag * diag_fraction));
    return std::max(min_radius, proportional);
}

}  // namespace amodal
