// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/png_io.hpp"

#include <png.h>

#include <cstring>

#include "amodal/errors.hpp"
#include "amodal/util.hpp"

namespace amodal {

namespace {

struct MemoryReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t offset;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
    auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (reader->offset + length > reader->size) {
        png_error(png, "png read past end of buffer");
        return;
    }
    std::memcpy(out, reader->data + reader->offset, length);
    reader->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void flush_callback(png_structp) {}

std::vector<std::uint8_t> encode(const std::uint8_t* rows, int width, int height, int channels) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorKind::IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::IoError, "png_create_info_struct failed");
    }
    std::vector<std::uint8_t> bytes;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::IoError, "png encode failed");
    }
    png_set_write_fn(png, &bytes, write_callback, flush_callback);
    const int color_type = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> row_ptrs(height);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y)
        row_ptrs[y] = const_cast<png_bytep>(rows + static_cast<std::size_t>(y) * stride);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return bytes;
}

struct Decoded {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // always expanded to 3 channels
};

Decoded decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw Error(ErrorKind::IoError, "not a PNG stream");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error(ErrorKind::IoError, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorKind::IoError, "png_create_info_struct failed");
    }
    MemoryReader reader{bytes.data(), bytes.size(), 0};
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::IoError, "png decode failed");
    }
    png_set_read_fn(png, &reader, read_callback);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    Decoded out;
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t stride = png_get_rowbytes(png, info);
    if (stride != static_cast<std::size_t>(out.width) * 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::IoError, "unexpected png row stride after expansion");
    }
    out.rgb.resize(stride * out.height);
    std::vector<png_bytep> row_ptrs(out.height);
    for (int y = 0; y < out.height; ++y)
        row_ptrs[y] = out.rgb.data() + static_cast<std::size_t>(y) * stride;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
    if (image.empty()) throw Error(ErrorKind::BadArgument, "cannot encode empty image");
    return encode(image.pixels().data(), image.width(), image.height(), 3);
}

std::vector<std::uint8_t> encode_mask_png(const BinaryMask& mask) {
    if (mask.empty_dims()) throw Error(ErrorKind::BadArgument, "cannot encode empty mask");
    std::vector<std::uint8_t> gray(mask.bits().size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.bits()[i] ? 255 : 0;
    return encode(gray.data(), mask.width(), mask.height(), 1);
}

Image decode_png(std::span<const std::uint8_t> bytes) {
    Decoded d = decode(bytes);
    return Image(d.width, d.height, std::move(d.rgb));
}

BinaryMask decode_mask_png(std::span<const std::uint8_t> bytes) {
    Decoded d = decode(bytes);
    BinaryMask mask(d.width, d.height);
    for (int y = 0; y < d.height; ++y)
        for (int x = 0; x < d.width; ++x)
            if (d.rgb[(static_cast<std::size_t>(y) * d.width + x) * 3] >= 128) mask.set(x, y);
    return mask;
}

Image read_png(const std::string& path) { return decode_png(read_binary_file(path)); }

BinaryMask read_mask_png(const std::string& path) { return decode_mask_png(read_binary_file(path)); }

void write_png(const std::string& path, const Image& image) {
    const auto bytes = encode_png(image);
    write_binary_file(path, bytes);
}

void write_mask_png(const std::string& path, const BinaryMask& mask) {
    const auto bytes = encode_mask_png(mask);
    write_binary_file(path, bytes);
}

}  // namespace amodal
