// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "amodal/types.hpp"

namespace amodal {

/// Morphological dilation. Output dims equal input dims; radius 0 is the
/// identity. Monotone: result always contains the input.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& element);

/// Bitwise OR over equal-dimension masks. The empty list needs explicit dims.
BinaryMask union_masks(const std::vector<BinaryMask>& masks, int width = 0, int height = 0);

BinaryMask intersect_masks(const BinaryMask& a, const BinaryMask& b);

/// Pixels of `a` not in `b`.
BinaryMask difference(const BinaryMask& a, const BinaryMask& b);

bool contains(const BinaryMask& outer, const BinaryMask& inner);

/// Copies `mask` into a canvas of new dims at (dx, dy), clipping at edges.
BinaryMask translate(const BinaryMask& mask, int dx, int dy, int new_width, int new_height);

struct CanvasExpansion {
    int width = 0;
    int height = 0;
    int offset_x = 0;
    int offset_y = 0;
    BinaryMask expansion_mask;  // set exactly outside the translated original frame
};

/// Grows a (width, height) canvas by the per-side ratios. The original frame
/// is anchored at (round(left*W), round(top*H)).
CanvasExpansion expand_canvas(int width, int height, const Expansion& e, double ceiling = 2.0);

/// Dilates each occluder mask, translates it into the expanded canvas, and
/// unions the results with the canvas-extension mask. One structuring element
/// per occluder; the single-element overload applies it to all.
BinaryMask build_inpaint_mask(const std::vector<BinaryMask>& occluder_masks,
                              const std::vector<StructuringElement>& elements,
                              const BinaryMask& expansion_mask, int offset_x, int offset_y);
BinaryMask build_inpaint_mask(const std::vector<BinaryMask>& occluder_masks,
                              const StructuringElement& element,
                              const BinaryMask& expansion_mask, int offset_x, int offset_y);

/// Replaces every pixel under the union of `masks` with pure white.
Image white_out(const Image& image, const std::vector<BinaryMask>& masks);

/// Builds the synthesis input: an expanded canvas filled with `background`,
/// with only the visible-target pixels copied over at their translated
/// positions. Returns the composite plus the translated visible mask.
struct ComposedInput {
    Image composite;
    BinaryMask visible_translated;
    int offset_x = 0;
    int offset_y = 0;
    Expansion expansion;
};
ComposedInput compose_input(const Image& image, const BinaryMask& visible, const Expansion& e,
                            Rgb background, double ceiling = 2.0);

/// |a AND b| / |a OR b|; both empty counts as perfect agreement (1.0).
double iou(const BinaryMask& a, const BinaryMask& b);

/// Pastes `inside` pixels where `mask` is set and `outside` pixels elsewhere.
Image composite_over(const Image& outside, const Image& inside, const BinaryMask& mask);

/// Nearest-neighbor resize so that max(side) == max_side; no-op when already
/// within bounds. Returns the applied scale factor (<= 1).
std::pair<Image, double> resize_max_side(const Image& image, int max_side);

/// Structuring-element radius for one occluder: max(min_radius,
/// round(fraction * bounding-box diagonal)).
int proportional_radius(const BinaryMask& occluder, int min_radius, double diag_fraction);

}  // namespace amodal
