// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "amodal/backends.hpp"
#include "amodal/config.hpp"
#include "amodal/mask_ops.hpp"
#include "amodal/types.hpp"

namespace amodal {

struct Occluder {
    std::string id;
    std::string label;
    BinaryMask mask;  // visible-region mask, original-frame coords
};

/// Intermediate products of the planning stages.
struct PlanningState {
    Image original;
    Query query;
    std::vector<Occluder> occluders;
    BinaryMask visible;  // original-frame coords
    bool grounding_failed = false;
    Expansion expansion;
    CanvasExpansion canvas;
    BinaryMask inpaint;  // expanded-canvas coords, visible region subtracted
    int rounds_used = 0;
    PipelineTrace trace;

    std::vector<std::string> occluder_labels() const;
};

struct HypothesisRun {
    std::vector<Hypothesis> items;  // normalized
    int selected = 0;
    std::vector<std::string> warnings;
};

struct PipelineOutput {
    Image image;
    CompletionPlan plan;
    double weight = 1.0;
    int hypothesis_index = 0;
};

struct PipelineResult {
    std::vector<PipelineOutput> outputs;
    std::vector<Hypothesis> hypotheses;
    int selected = 0;
    std::vector<std::string> warnings;
    PipelineTrace trace;
};

/// Carries the finished plan out of a failed synthesis so callers can
/// persist it for offline retry.
class SynthesisError : public Error {
public:
    SynthesisError(const std::string& message, CompletionPlan plan)
        : Error(ErrorKind::SynthesisFailed, message), plan_(std::move(plan)) {}
    const CompletionPlan& plan() const noexcept { return plan_; }

private:
    CompletionPlan plan_;
};

/// Stage 1: occlusion analysis, segmentation grounding, boundary expansion,
/// and the initial inpaint mask. With the boundary agent ablated the
/// expansion is zero. A missing target mask sets grounding_failed for the
/// verification stage to repair.
PlanningState stage1_reason(const Image& image, const Query& query, const svc::BackendSet& backends,
                            const PipelineConfig& config);

/// Stage 2: closed-loop verification. Each round re-grounds the target if
/// needed, builds the white-out view, asks the verification agent for
/// residual occluders, and regrows the mask until a fixed point or the round
/// cap. Grounding repair stays active when the agent is ablated; a second
/// grounding failure aborts with TargetNotFound.
PlanningState verify_loop(PlanningState state, const svc::BackendSet& backends,
                          const PipelineConfig& config);

/// Stage 3: hypothesis generation, normalization, occluder-mention lint with
/// one re-prompt, and argmax selection (first occurrence wins ties).
HypothesisRun run_hypotheses(const Image& image, const Query& query,
                             const std::vector<std::string>& occluder_labels,
                             const svc::BackendSet& backends, const PipelineConfig& config,
                             PipelineTrace& trace);

/// Stage 4: plan consolidation; the returned plan always passes validate_plan.
CompletionPlan integrate_plan(const PlanningState& state, const Hypothesis& hypothesis,
                              const PipelineConfig& config);

/// Stage 5: one synthesis pass. Pixels outside the inpaint mask are pasted
/// back from the composite afterwards, making preservation unconditional.
Image synthesize(const CompletionPlan& plan, svc::InpaintBackend& backend, std::uint64_t seed,
                 const PipelineConfig& config, PipelineTrace& trace);

/// All stages composed. With enumerate_all_hypotheses one output per
/// hypothesis is produced (same geometry, different description).
PipelineResult run_pipeline(const Image& image, const Query& query,
                            const svc::BackendSet& backends, const PipelineConfig& config);

/// True when the trace stages appear in pipeline order.
bool trace_in_stage_order(const PipelineTrace& trace);

}  // namespace amodal
