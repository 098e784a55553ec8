// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amodal/types.hpp"

namespace amodal {

/// 8-bit RGB PNG bytes.
std::vector<std::uint8_t> encode_png(const Image& image);

/// 8-bit grayscale PNG bytes; set pixels are 255 (fill), clear are 0 (keep).
std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask);

/// Decodes any 8-bit PNG to RGB (grayscale is replicated across channels).
Image decode_png(std::span<const std::uint8_t> bytes);

/// Decodes a grayscale-convention mask PNG; values >= 128 are set.
BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes);

Image read_png(const std::string& path);
BinaryMask read_mask_png(const std::string& path);
void write_png(const std::string& path, const Image& image);
void write_mask_png(const std::string& path, const BinaryMask& mask);

}  // namespace amodal
