// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "amodal/mask_ops.hpp"
#include "amodal/util.hpp"
#include "test_support.hpp"

using namespace amodal;
using testsupport::random_image;
using testsupport::random_mask;

namespace {

// Brute-force dilation: per-output-pixel neighborhood scan, the opposite loop
// structure of the library's element stamping.
BinaryMask dilate_oracle(const BinaryMask& mask, const StructuringElement& element) {
    const int r = element.radius;
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            bool hit = false;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                for (int dx = -r; dx <= r && !hit; ++dx) {
                    if (element.shape == StructuringElement::Shape::Disk &&
                        dx * dx + dy * dy > r * r)
                        continue;
                    const int sx = x + dx;
                    const int sy = y + dy;
                    if (sx >= 0 && sy >= 0 && sx < mask.width() && sy < mask.height() &&
                        mask.at(sx, sy))
                        hit = true;
                }
            }
            if (hit) out.set(x, y);
        }
    }
    return out;
}

BinaryMask translate_oracle(const BinaryMask& mask, int dx, int dy, int w, int h) {
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int sx = x - dx;
            const int sy = y - dy;
            if (sx >= 0 && sy >= 0 && sx < mask.width() && sy < mask.height() && mask.at(sx, sy))
                out.set(x, y);
        }
    return out;
}

}  // namespace

TEST_CASE("dilate radius 0 is the identity") {
    std::mt19937 rng(7);
    const BinaryMask mask = random_mask(rng, 33, 21);
    CHECK(dilate(mask, {StructuringElement::Shape::Disk, 0}) == mask);
    CHECK(dilate(mask, {StructuringElement::Shape::Square, 0}) == mask);
}

TEST_CASE("dilate single pixel with square radius 1 sets the 3x3 block") {
    BinaryMask mask(11, 11);
    mask.set(5, 5);
    const BinaryMask out = dilate(mask, {StructuringElement::Shape::Square, 1});
    CHECK(out.count() == 9);
    for (int y = 4; y <= 6; ++y)
        for (int x = 4; x <= 6; ++x) CHECK(out.at(x, y));
}

TEST_CASE("dilate matches the brute-force oracle on random masks") {
    std::mt19937 rng(42);
    for (int i = 0; i < 50; ++i) {
        const BinaryMask mask = random_mask(rng, 64, 64, 0.15);
        const StructuringElement disk{StructuringElement::Shape::Disk, 3};
        CHECK(dilate(mask, disk) == dilate_oracle(mask, disk));
    }
    const StructuringElement square{StructuringElement::Shape::Square, 2};
    for (int i = 0; i < 10; ++i) {
        const BinaryMask mask = random_mask(rng, 48, 32, 0.25);
        CHECK(dilate(mask, square) == dilate_oracle(mask, square));
    }
}

TEST_CASE("dilation is monotone and distributes over union") {
    std::mt19937 rng(11);
    const StructuringElement disk{StructuringElement::Shape::Disk, 2};
    for (int i = 0; i < 25; ++i) {
        const BinaryMask a = random_mask(rng, 40, 40, 0.1);
        const BinaryMask b = random_mask(rng, 40, 40, 0.1);
        const BinaryMask da = dilate(a, disk);
        const BinaryMask db = dilate(b, disk);
        CHECK(contains(da, a));
        const BinaryMask merged = union_masks({a, b});
        CHECK(contains(dilate(merged, disk), da));  // subset-monotone
        CHECK(dilate(merged, disk) == union_masks({da, db}));
    }
}

TEST_CASE("union identities") {
    std::mt19937 rng(3);
    const BinaryMask a = random_mask(rng, 20, 20);
    const BinaryMask empty(20, 20);
    CHECK(union_masks({a, empty}) == a);
    CHECK(union_masks({a, a}) == a);
    CHECK(union_masks({}, 20, 20) == empty);
}

TEST_CASE("union equals any fold order of pairwise ORs") {
    std::mt19937 rng(17);
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 5; ++i) masks.push_back(random_mask(rng, 30, 30, 0.2));
    const BinaryMask reference = union_masks(masks);
    std::vector<int> order = {0, 1, 2, 3, 4};
    for (int perm = 0; perm < 8; ++perm) {
        std::shuffle(order.begin(), order.end(), rng);
        BinaryMask acc = masks[order[0]];
        for (std::size_t i = 1; i < order.size(); ++i) acc = union_masks({acc, masks[order[i]]});
        CHECK(acc == reference);
    }
}

TEST_CASE("union rejects dimension mismatch") {
    const BinaryMask a(10, 10);
    const BinaryMask b(11, 10);
    CHECK_THROWS_WITH_AS(union_masks({a, b}), doctest::Contains("DimMismatch"), Error);
}

TEST_CASE("expand_canvas zero expansion") {
    const auto out = expand_canvas(100, 100, {});
    CHECK(out.width == 100);
    CHECK(out.height == 100);
    CHECK(out.offset_x == 0);
    CHECK(out.offset_y == 0);
    CHECK(out.expansion_mask.count() == 0);
}

TEST_CASE("expand_canvas bottom half expansion") {
    const auto out = expand_canvas(100, 100, {0, 0.5, 0, 0});
    CHECK(out.width == 100);
    CHECK(out.height == 150);
    CHECK(out.offset_x == 0);
    CHECK(out.offset_y == 0);
    CHECK(out.expansion_mask.count() == 100u * 50u);
    for (int y = 100; y < 150; ++y)
        for (int x = 0; x < 100; x += 17) CHECK(out.expansion_mask.at(x, y));
}

TEST_CASE("expand_canvas conserves area on random inputs") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> dim(8, 120);
    std::uniform_real_distribution<double> ratio(0.0, 1.2);
    for (int i = 0; i < 60; ++i) {
        const int w = dim(rng);
        const int h = dim(rng);
        const Expansion e{ratio(rng), ratio(rng), ratio(rng), ratio(rng)};
        const auto out = expand_canvas(w, h, e);
        CHECK(out.expansion_mask.count() ==
              static_cast<std::size_t>(out.width) * out.height - static_cast<std::size_t>(w) * h);
    }
}

TEST_CASE("expand_canvas enforces the ceiling") {
    CHECK_THROWS_WITH_AS(expand_canvas(10, 10, {0, 3.0, 0, 0}),
                         doctest::Contains("ExpansionTooLarge"), Error);
}

TEST_CASE("build_inpaint_mask with no occluders equals the expansion mask") {
    const auto canvas = expand_canvas(40, 40, {0, 0.5, 0, 0});
    const BinaryMask out = build_inpaint_mask({}, StructuringElement{}, canvas.expansion_mask,
                                              canvas.offset_x, canvas.offset_y);
    CHECK(out == canvas.expansion_mask);
}

TEST_CASE("build_inpaint_mask identities compose") {
    std::mt19937 rng(5);
    const BinaryMask occluder = random_mask(rng, 40, 40, 0.2);
    const auto canvas = expand_canvas(40, 40, {});
    const BinaryMask out =
        build_inpaint_mask({occluder}, StructuringElement{StructuringElement::Shape::Disk, 0},
                           canvas.expansion_mask, canvas.offset_x, canvas.offset_y);
    CHECK(out == occluder);
}

TEST_CASE("build_inpaint_mask matches an independent recomputation") {
    std::mt19937 rng(29);
    for (int i = 0; i < 50; ++i) {
        const BinaryMask occ_a = random_mask(rng, 64, 64, 0.1);
        const BinaryMask occ_b = random_mask(rng, 64, 64, 0.1);
        const Expansion e{0.0, 0.25, 0.1, 0.0};
        const auto canvas = expand_canvas(64, 64, e);
        const StructuringElement disk{StructuringElement::Shape::Disk, 2};
        const BinaryMask got = build_inpaint_mask({occ_a, occ_b}, disk, canvas.expansion_mask,
                                                  canvas.offset_x, canvas.offset_y);
        BinaryMask expected = canvas.expansion_mask;
        for (const auto& occ : {occ_a, occ_b}) {
            const BinaryMask placed = translate_oracle(dilate_oracle(occ, disk), canvas.offset_x,
                                                       canvas.offset_y, canvas.width, canvas.height);
            expected = union_masks({expected, placed});
        }
        CHECK(got == expected);
    }
}

TEST_CASE("white_out leaves the unmasked region byte-identical") {
    std::mt19937 rng(31);
    const Image img = random_image(rng, 50, 40);

    SUBCASE("empty mask list is a no-op") { CHECK(white_out(img, {}) == img); }

    SUBCASE("full mask whitens everything") {
        const BinaryMask full(50, 40, true);
        const Image out = white_out(img, {full});
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 50; ++x) CHECK(out.at(x, y) == kWhite);
    }

    SUBCASE("region hash of the complement is unchanged") {
        const BinaryMask mask = random_mask(rng, 50, 40, 0.3);
        const Image out = white_out(img, {mask});
        auto region_hash = [&](const Image& im) {
            std::vector<std::uint8_t> bytes;
            for (int y = 0; y < im.height(); ++y)
                for (int x = 0; x < im.width(); ++x)
                    if (!mask.at(x, y)) {
                        const Rgb c = im.at(x, y);
                        bytes.push_back(c.r);
                        bytes.push_back(c.g);
                        bytes.push_back(c.b);
                    }
            return fnv1a64(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
        };
        CHECK(region_hash(out) == region_hash(img));
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 50; ++x)
                if (mask.at(x, y)) CHECK(out.at(x, y) == kWhite);
    }
}

TEST_CASE("compose_input") {
    std::mt19937 rng(37);
    const Image img = random_image(rng, 30, 20);

    SUBCASE("full visibility and zero expansion reproduce the image") {
        const BinaryMask full(30, 20, true);
        const auto out = compose_input(img, full, {}, kWhite);
        CHECK(out.composite == img);
    }

    SUBCASE("empty visibility gives a uniform background") {
        const BinaryMask none(30, 20);
        const auto out = compose_input(img, none, {0.5, 0, 0, 0.5}, Rgb{9, 9, 9});
        for (int y = 0; y < out.composite.height(); ++y)
            for (int x = 0; x < out.composite.width(); ++x)
                CHECK(out.composite.at(x, y) == Rgb{9, 9, 9});
    }

    SUBCASE("visible pixels land at translated positions, complement is background") {
        const BinaryMask visible = random_mask(rng, 30, 20, 0.4);
        const Expansion e{0.25, 0.0, 0.5, 0.0};
        const auto out = compose_input(img, visible, e, kWhite);
        const int dx = out.offset_x;
        const int dy = out.offset_y;
        CHECK(dx == 15);
        CHECK(dy == 5);
        for (int y = 0; y < out.composite.height(); ++y) {
            for (int x = 0; x < out.composite.width(); ++x) {
                const int sx = x - dx;
                const int sy = y - dy;
                const bool vis = sx >= 0 && sy >= 0 && sx < 30 && sy < 20 && visible.at(sx, sy);
                CHECK(out.composite.at(x, y) == (vis ? img.at(sx, sy) : kWhite));
                CHECK(out.visible_translated.at(x, y) == vis);
            }
        }
    }
}

TEST_CASE("iou") {
    BinaryMask a(10, 10), b(10, 10);
    for (int i = 0; i < 5; ++i) a.set(i, 0);
    SUBCASE("identical nonempty masks") { CHECK(iou(a, a) == 1.0); }
    SUBCASE("disjoint nonempty masks") {
        for (int i = 0; i < 5; ++i) b.set(i, 5);
        CHECK(iou(a, b) == 0.0);
    }
    SUBCASE("nested masks at half area") {
        BinaryMask small(10, 10), large(10, 10);
        for (int i = 0; i < 50; ++i) small.set(i % 10, i / 10);
        for (int i = 0; i < 100; ++i) large.set(i % 10, i / 10);
        CHECK(iou(small, large) == 0.5);
    }
    SUBCASE("both empty agree perfectly") {
        const BinaryMask e1(4, 4), e2(4, 4);
        CHECK(iou(e1, e2) == 1.0);
    }
    SUBCASE("symmetry and bounds on random pairs") {
        std::mt19937 rng(41);
        for (int i = 0; i < 20; ++i) {
            const BinaryMask x = random_mask(rng, 16, 16);
            const BinaryMask y = random_mask(rng, 16, 16);
            const double value = iou(x, y);
            CHECK(value == iou(y, x));
            CHECK(value >= 0.0);
            CHECK(value <= 1.0);
        }
    }
}

TEST_CASE("proportional radius never drops below the minimum") {
    BinaryMask tiny(100, 100);
    tiny.set(5, 5);
    CHECK(proportional_radius(tiny, 2, 0.015) == 2);
    BinaryMask wide(1000, 1000);
    for (int x = 0; x < 1000; ++x) wide.set(x, 500);
    CHECK(proportional_radius(wide, 2, 0.015) == 15);
}
