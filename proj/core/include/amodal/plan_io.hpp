// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "amodal/types.hpp"

namespace amodal {

/// On-disk plan layout: <dir>/input.png (RGB), mask.png (gray, 0=keep,
/// 255=fill), visible.png (gray), plan.json (description, offsets, expansion,
/// trace). Round-trips losslessly.
void write_plan_dir(const std::string& dir, const CompletionPlan& plan);
CompletionPlan read_plan_dir(const std::string& dir);

std::string trace_to_json(const PipelineTrace& trace);
PipelineTrace trace_from_json(const std::string& text);

}  // namespace amodal
