// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "amodal/types.hpp"

namespace amodal {

struct RetryPolicy {
    int max_attempts = 3;      // total tries per logical call
    int backoff_ms = 200;      // first retry delay
    double multiplier = 2.0;   // exponential growth
};

struct DilationConfig {
    StructuringElement::Shape shape = StructuringElement::Shape::Disk;
    int min_radius = 2;
    double bbox_diag_fraction = 0.015;
    std::optional<int> fixed_radius;  // overrides the proportional rule

    StructuringElement element_for(const BinaryMask& occluder) const;
};

struct AblationFlags {
    bool boundary_agent = true;
    bool verification_agent = true;
    bool hypothesis_diversity = true;
};

struct PipelineConfig {
    int hypothesis_count = 3;  // K
    int max_verification_rounds = 2;
    DilationConfig dilation;
    double expansion_ceiling = 2.0;
    RetryPolicy retry;
    AblationFlags ablation;
    std::uint64_t synthesis_seed = 0;
    Rgb background = kWhite;
    int max_image_side = 1024;  // downscale cap for chat attachments
    bool enumerate_all_hypotheses = false;
    int parallelism = 1;  // batch mode only; a single run is sequential

    void validate() const;

    /// Hard ceiling on backend calls for one run, assertable from the trace.
    int call_bound() const {
        return 3 + max_verification_rounds * 2 + hypothesis_count * retry.max_attempts;
    }
};

}  // namespace amodal
