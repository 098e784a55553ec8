// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "amodal/errors.hpp"

namespace amodal {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{255, 255, 255};

/// 8-bit RGB raster, row-major. Immutable by convention once handed to the
/// pipeline; mutating accessors exist for construction only.
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {0, 0, 0});
    Image(int width, int height, std::vector<std::uint8_t> rgb_pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return pixels_.empty(); }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::vector<std::uint8_t>& raw() noexcept { return pixels_; }

    Rgb at(int x, int y) const {
        const std::size_t i = index(x, y);
        return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
    }
    void set(int x, int y, Rgb c) {
        const std::size_t i = index(x, y);
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }
    bool in_bounds(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    bool same_dims(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y) const {
        if (!in_bounds(x, y)) throw Error(ErrorKind::BadArgument, "pixel access out of bounds");
        return (static_cast<std::size_t>(y) * width_ + x) * 3;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Dense boolean raster. Dilation and union are the hot operations, so bits
/// are stored unpacked (one byte per pixel).
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty_dims() const noexcept { return width_ == 0 || height_ == 0; }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }
    bool in_bounds(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }
    bool same_dims(const BinaryMask& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::vector<std::uint8_t>& raw() noexcept { return bits_; }

    std::size_t count() const noexcept;
    bool any() const noexcept { return count() > 0; }

    /// Tight bounding box of set pixels as {x0, y0, x1, y1} inclusive;
    /// all -1 when the mask is empty.
    struct Box {
        int x0 = -1, y0 = -1, x1 = -1, y1 = -1;
        bool valid() const noexcept { return x0 >= 0; }
        double diagonal() const noexcept;
    };
    Box bounding_box() const noexcept;

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t index(int x, int y) const {
        if (!in_bounds(x, y)) throw Error(ErrorKind::BadArgument, "mask access out of bounds");
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Target-object phrase plus a stable identifier for bookkeeping.
struct Query {
    std::string text;
    std::string target_id;
};

/// Per-side canvas growth ratios relative to the original side lengths.
struct Expansion {
    double top = 0.0, bottom = 0.0, left = 0.0, right = 0.0;

    bool is_zero() const noexcept { return top == 0 && bottom == 0 && left == 0 && right == 0; }
    /// Throws ExpansionTooLarge / BadArgument when outside [0, ceiling].
    void validate(double ceiling) const;
    bool operator==(const Expansion&) const = default;
};

struct Hypothesis {
    std::string description;
    double weight = 0.0;  // normalized confidence in [0,1]
};

struct StructuringElement {
    enum class Shape { Disk, Square };
    Shape shape = Shape::Disk;
    int radius = 0;  // 0 = identity
};

struct TraceEntry {
    std::string stage;
    std::string role;
    std::string request_digest;
    std::string response_digest;
    double wall_ms = 0.0;
    int attempts = 1;
    double image_scale = 1.0;  // downscale applied to attached images
};

struct PipelineTrace {
    std::vector<TraceEntry> entries;
    int verification_rounds = 0;
    int selected_hypothesis = -1;
    std::map<std::string, std::string> template_versions;

    int backend_calls() const noexcept { return static_cast<int>(entries.size()); }
};

/// The execution plan handed to synthesis: preprocessed composite, the mask
/// of pixels to fill, the chosen description, and enough geometry to map the
/// original frame into the expanded canvas.
struct CompletionPlan {
    Image input_composite;
    BinaryMask inpaint_mask;
    BinaryMask visible_mask;  // preserved target pixels, expanded-canvas coords
    std::string description;
    int offset_x = 0;
    int offset_y = 0;
    Expansion expansion;
    PipelineTrace trace;
};

/// Report-style check of the plan invariants. Empty result means valid.
/// Violation names: dim_mismatch_mask, dim_mismatch_visible,
/// mask_overlaps_visible, empty_description, bad_offset.
std::vector<std::string> validate_plan(const CompletionPlan& plan);

}  // namespace amodal
