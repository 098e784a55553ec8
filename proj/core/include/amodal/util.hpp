// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace amodal {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(const std::string& text);

/// 16-char lowercase hex of fnv1a64; used for trace digests and
/// prompt-template version stamps.
std::string digest_hex(std::span<const std::uint8_t> bytes);
std::string digest_hex(const std::string& text);

std::string base64_encode(std::span<const std::uint8_t> bytes);

std::string to_lower(std::string text);

/// Replaces every occurrence of `needle` in `text`.
std::string replace_all(std::string text, const std::string& needle, const std::string& replacement);

/// Deterministic 64-bit mix (splitmix64 step); drives seed-dependent mock behavior.
std::uint64_t mix64(std::uint64_t x);

/// Fixed-point decimal formatting, locale-independent ("0.450" for 0.45, 3 digits).
std::string format_fixed(double value, int digits);

std::vector<std::string> split(const std::string& text, char sep);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace amodal
