// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "amodal/mask_ops.hpp"
#include "amodal/metrics.hpp"
#include "amodal/mock_backends.hpp"
#include "amodal/orchestrator.hpp"
#include "amodal/scene_fixture.hpp"

namespace {

using namespace amodal;

BinaryMask random_mask(int w, int h, double density, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (coin(rng) < density) mask.set(x, y);
    return mask;
}

Image random_image(int w, int h, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> byte(0, 255);
    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.set(x, y, {static_cast<std::uint8_t>(byte(rng)),
                           static_cast<std::uint8_t>(byte(rng)),
                           static_cast<std::uint8_t>(byte(rng))});
    return img;
}

void BM_DilateDisk(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const BinaryMask mask = random_mask(side, side, 0.15, 7);
    const StructuringElement disk{StructuringElement::Shape::Disk, 3};
    for (auto _ : state) benchmark::DoNotOptimize(dilate(mask, disk));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_DilateDisk)->Arg(64)->Arg(256)->Arg(1024);

void BM_UnionMasks(benchmark::State& state) {
    std::vector<BinaryMask> masks;
    for (int i = 0; i < 8; ++i) masks.push_back(random_mask(512, 512, 0.2, 11 + i));
    for (auto _ : state) benchmark::DoNotOptimize(union_masks(masks));
}
BENCHMARK(BM_UnionMasks);

void BM_BuildInpaintMask(benchmark::State& state) {
    const BinaryMask occ_a = random_mask(512, 512, 0.1, 3);
    const BinaryMask occ_b = random_mask(512, 512, 0.1, 5);
    const auto canvas = expand_canvas(512, 512, {0.0, 0.25, 0.0, 0.0});
    const StructuringElement disk{StructuringElement::Shape::Disk, 4};
    for (auto _ : state)
        benchmark::DoNotOptimize(build_inpaint_mask({occ_a, occ_b}, disk, canvas.expansion_mask,
                                                    canvas.offset_x, canvas.offset_y));
}
BENCHMARK(BM_BuildInpaintMask);

void BM_Ssim(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Image a = random_image(side, side, 13);
    const Image b = random_image(side, side, 17);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256)->Arg(512);

void BM_Psnr(benchmark::State& state) {
    const Image a = random_image(512, 512, 19);
    const Image b = random_image(512, 512, 23);
    for (auto _ : state) benchmark::DoNotOptimize(psnr(a, b));
}
BENCHMARK(BM_Psnr);

void BM_MockPipeline(benchmark::State& state) {
    auto fixture = std::make_shared<SceneFixture>(
        SceneFixture::load(std::string(AMODAL_FIXTURE_DIR) + "/bench.json"));
    const auto backends = svc::mock_from_fixture(fixture);
    const Image observed = fixture->render_observed();
    const Query query{fixture->target().label, fixture->target_id};
    const PipelineConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(run_pipeline(observed, query, backends, cfg));
}
BENCHMARK(BM_MockPipeline);

}  // namespace

BENCHMARK_MAIN();
