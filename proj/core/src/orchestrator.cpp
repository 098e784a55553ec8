// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/orchestrator.hpp"

#include <algorithm>

#include "amodal/service.hpp"
#include "amodal/util.hpp"

namespace amodal {

namespace {

using agents::AgentRole;

void validate_dilation_config(const DilationConfig& cfg) {
    if (cfg.min_radius < 0) throw Error(ErrorKind::BadConfig, "dilation min_radius must be >= 0");
    if (cfg.fixed_radius && *cfg.fixed_radius < 0)
        throw Error(ErrorKind::BadConfig, "dilation fixed_radius must be >= 0");
    if (cfg.bbox_diag_fraction < 0)
        throw Error(ErrorKind::BadConfig, "dilation bbox_diag_fraction must be >= 0");
}

// One chat exchange with schema-repair retries; every attempt is traced.
template <typename T>
T invoke_agent(const svc::BackendSet& backends, AgentRole role, const std::string& stage,
               const agents::RenderedPrompt& prompt, T (*parse)(const std::string&),
               const PipelineConfig& config, PipelineTrace& trace) {
    auto send = [&](const std::string& text) {
        TraceEntry entry;
        entry.stage = stage;
        std::string reply = svc::chat(backends.chat_for(role), role, text, prompt.images,
                                      config.retry, config.max_image_side, entry);
        trace.entries.push_back(entry);
        return reply;
    };
    trace.template_versions[prompt.template_name] = prompt.template_version;
    auto [value, attempts] = agents::call_with_repair<T>(send, prompt.text, parse);
    (void)attempts;
    return value;
}

svc::SegmentationResult traced_segment(const svc::BackendSet& backends, const Image& image,
                                       const std::vector<std::string>& labels,
                                       const std::string& stage, const PipelineConfig& config,
                                       PipelineTrace& trace) {
    TraceEntry entry;
    entry.stage = stage;
    auto result =
        svc::segment(backends.segmentation_backend(), image, labels, config.retry, entry);
    trace.entries.push_back(entry);
    return result;
}

// Rebuilds the inpaint mask from the current occluder set: dilate each
// occluder, translate into the expanded canvas, union with the extension
// mask, and finally subtract the translated visible region so preservation
// always wins over filling.
void recompute_inpaint(PlanningState& state, const PipelineConfig& config) {
    std::vector<BinaryMask> masks;
    std::vector<StructuringElement> elements;
    for (const auto& occ : state.occluders) {
        masks.push_back(occ.mask);
        elements.push_back(config.dilation.element_for(occ.mask));
    }
    const BinaryMask base = build_inpaint_mask(masks, elements, state.canvas.expansion_mask,
                                               state.canvas.offset_x, state.canvas.offset_y);
    const BinaryMask visible_translated =
        translate(state.visible, state.canvas.offset_x, state.canvas.offset_y,
                  state.canvas.width, state.canvas.height);
    state.inpaint = difference(base, visible_translated);
}

bool has_label(const std::vector<Occluder>& occluders, const std::string& label) {
    const std::string needle = to_lower(label);
    return std::any_of(occluders.begin(), occluders.end(), [&](const Occluder& o) {
        return to_lower(o.label) == needle || to_lower(o.id) == needle;
    });
}

// Re-segment the target with the original query only.
bool reground_target(PlanningState& state, const svc::BackendSet& backends,
                     const PipelineConfig& config, const std::string& stage) {
    const auto result =
        traced_segment(backends, state.original, {state.query.text}, stage, config, state.trace);
    if (!result.masks.front().any()) return false;
    state.visible = result.masks.front();
    state.grounding_failed = false;
    recompute_inpaint(state, config);
    return true;
}

}  // namespace

StructuringElement DilationConfig::element_for(const BinaryMask& occluder) const {
    const int radius = fixed_radius
                           ? *fixed_radius
                           : proportional_radius(occluder, min_radius, bbox_diag_fraction);
    return {shape, radius};
}

void PipelineConfig::validate() const {
    if (hypothesis_count < 1) throw Error(ErrorKind::BadConfig, "hypothesis count must be >= 1");
    if (max_verification_rounds < 0)
        throw Error(ErrorKind::BadConfig, "max_verification_rounds must be >= 0");
    if (expansion_ceiling <= 0) throw Error(ErrorKind::BadConfig, "expansion ceiling must be > 0");
    if (retry.max_attempts < 1) throw Error(ErrorKind::BadConfig, "retry max_attempts must be >= 1");
    if (parallelism < 1) throw Error(ErrorKind::BadConfig, "parallelism must be >= 1");
    validate_dilation_config(dilation);
}

std::vector<std::string> PlanningState::occluder_labels() const {
    std::vector<std::string> labels;
    labels.reserve(occluders.size());
    for (const auto& o : occluders) labels.push_back(o.label);
    return labels;
}

PlanningState stage1_reason(const Image& image, const Query& query,
                            const svc::BackendSet& backends, const PipelineConfig& config) {
    config.validate();
    if (query.text.empty()) throw Error(ErrorKind::BadArgument, "query text must be nonempty");

    PlanningState state;
    state.original = image;
    state.query = query;

    const auto occlusion = invoke_agent<agents::OcclusionResponse>(
        backends, AgentRole::Occlusion, "stage1.occlusion",
        agents::render_occlusion_prompt({image, query.text}), agents::parse_occlusion, config,
        state.trace);

    std::vector<std::string> labels = {query.text};
    for (const auto& occ : occlusion.occluders) labels.push_back(occ.label);
    const auto segmented =
        traced_segment(backends, image, labels, "stage1.segmentation", config, state.trace);
    state.visible = segmented.masks.front();
    state.grounding_failed = !state.visible.any();
    for (std::size_t i = 0; i < occlusion.occluders.size(); ++i)
        state.occluders.push_back(
            {occlusion.occluders[i].id, occlusion.occluders[i].label, segmented.masks[i + 1]});

    if (config.ablation.boundary_agent) {
        const auto boundary = invoke_agent<agents::BoundaryResponse>(
            backends, AgentRole::Boundary, "stage1.boundary",
            agents::render_boundary_prompt(
                {image, state.visible, query.text, config.expansion_ceiling}),
            agents::parse_boundary, config, state.trace);
        state.expansion = boundary.expansion;
    } else {
        state.expansion = Expansion{};
    }

    state.canvas =
        expand_canvas(image.width(), image.height(), state.expansion, config.expansion_ceiling);
    recompute_inpaint(state, config);
    return state;
}

PlanningState verify_loop(PlanningState state, const svc::BackendSet& backends,
                          const PipelineConfig& config) {
    if (!config.ablation.verification_agent) {
        // Grounding repair is a segmentation concern and stays active when
        // the verification agent is ablated; planning is meaningless without
        // a visible target.
        if (state.grounding_failed) {
            if (!reground_target(state, backends, config, "verify.reground"))
                throw Error(ErrorKind::TargetNotFound,
                            "target could not be grounded after re-segmentation");
        }
        return state;
    }

    for (int round = 1; round <= config.max_verification_rounds; ++round) {
        if (state.grounding_failed) {
            if (!reground_target(state, backends, config, "verify.reground"))
                throw Error(ErrorKind::TargetNotFound,
                            "target could not be grounded after re-segmentation");
        }

        std::vector<BinaryMask> occluder_masks;
        for (const auto& o : state.occluders) occluder_masks.push_back(o.mask);
        const Image whited = white_out(state.original, occluder_masks);

        const auto verification = invoke_agent<agents::VerificationResponse>(
            backends, AgentRole::Verification, "verify.residuals",
            agents::render_verification_prompt(
                {whited, state.query.text, state.occluder_labels()}),
            agents::parse_verification, config, state.trace);
        state.rounds_used = round;
        state.trace.verification_rounds = round;

        std::vector<std::string> residuals;
        for (const auto& label : verification.residual_labels())
            if (!has_label(state.occluders, label)) residuals.push_back(label);
        if (residuals.empty()) break;

        const auto segmented = traced_segment(backends, state.original, residuals,
                                              "verify.segmentation", config, state.trace);
        for (std::size_t i = 0; i < residuals.size(); ++i)
            state.occluders.push_back({residuals[i], residuals[i], segmented.masks[i]});
        recompute_inpaint(state, config);
    }
    return state;
}

HypothesisRun run_hypotheses(const Image& image, const Query& query,
                             const std::vector<std::string>& occluder_labels,
                             const svc::BackendSet& backends, const PipelineConfig& config,
                             PipelineTrace& trace) {
    config.validate();
    const bool single = !config.ablation.hypothesis_diversity;
    agents::HypothesisContext context{image, query.text, config.hypothesis_count, occluder_labels,
                                      single};

    auto generate = [&](const agents::RenderedPrompt& prompt) {
        const auto response = invoke_agent<agents::HypothesisResponse>(
            backends, AgentRole::Hypothesis, "hypotheses", prompt, agents::parse_hypotheses,
            config, trace);
        return agents::normalize_hypotheses(response);
    };

    agents::HypothesisSet set = generate(agents::render_hypothesis_prompt(context));

    auto violation_counts = [&](const agents::HypothesisSet& s) {
        std::vector<int> counts;
        for (const auto& h : s.items)
            counts.push_back(
                static_cast<int>(agents::lint_description(h.description, occluder_labels).size()));
        return counts;
    };

    HypothesisRun run;
    std::vector<int> violations = violation_counts(set);
    const bool any_violation =
        std::any_of(violations.begin(), violations.end(), [](int v) { return v > 0; });
    if (any_violation) {
        // One corrective re-prompt, then fall back to the cleanest candidate.
        agents::RenderedPrompt retry_prompt = agents::render_hypothesis_prompt(context);
        retry_prompt.text +=
            "\n\nYour previous answer mentioned an occluding object. Rewrite every description "
            "without referring to any of the listed objects.";
        agents::HypothesisSet retried = generate(retry_prompt);
        const std::vector<int> retried_violations = violation_counts(retried);
        const bool still_bad = std::any_of(retried_violations.begin(), retried_violations.end(),
                                           [](int v) { return v > 0; });
        set = std::move(retried);
        violations = retried_violations;
        if (still_bad) run.warnings.push_back("occluder_lint_unresolved");
    }
    run.warnings.insert(run.warnings.end(), set.warnings.begin(), set.warnings.end());
    run.items = set.items;

    // Cleanest candidate first (fewest lint hits), then highest weight,
    // first occurrence breaking exact ties.
    int best = 0;
    for (int i = 1; i < static_cast<int>(run.items.size()); ++i) {
        if (violations[i] < violations[best] ||
            (violations[i] == violations[best] && run.items[i].weight > run.items[best].weight))
            best = i;
    }
    run.selected = best;
    trace.selected_hypothesis = best;
    return run;
}

CompletionPlan integrate_plan(const PlanningState& state, const Hypothesis& hypothesis,
                              const PipelineConfig& config) {
    const ComposedInput composed = compose_input(state.original, state.visible, state.expansion,
                                                 config.background, config.expansion_ceiling);
    CompletionPlan plan;
    plan.input_composite = composed.composite;
    plan.visible_mask = composed.visible_translated;
    plan.inpaint_mask = state.inpaint;
    plan.description = hypothesis.description;
    plan.offset_x = composed.offset_x;
    plan.offset_y = composed.offset_y;
    plan.expansion = state.expansion;
    plan.trace = state.trace;

    const auto violations = validate_plan(plan);
    if (!violations.empty()) {
        std::string joined;
        for (const auto& v : violations) joined += v + " ";
        throw Error(ErrorKind::BadArgument, "integrated plan violates invariants: " + joined);
    }
    return plan;
}

Image synthesize(const CompletionPlan& plan, svc::InpaintBackend& backend, std::uint64_t seed,
                 const PipelineConfig& config, PipelineTrace& trace) {
    if (!validate_plan(plan).empty())
        throw Error(ErrorKind::BadArgument, "synthesize needs a valid plan");
    TraceEntry entry;
    entry.stage = "synthesis";
    Image raw;
    try {
        raw = svc::inpaint(backend, plan.input_composite, plan.inpaint_mask, plan.description,
                           seed, config.retry, entry);
    } catch (const Error& e) {
        trace.entries.push_back(entry);
        if (e.kind() == ErrorKind::BackendUnavailable || e.kind() == ErrorKind::BackendRejected)
            throw SynthesisError(e.what(), plan);
        throw;
    }
    trace.entries.push_back(entry);
    // The generative backend may perturb unmasked pixels; paste the composite
    // back outside the mask so preservation is unconditional.
    return composite_over(plan.input_composite, raw, plan.inpaint_mask);
}

PipelineResult run_pipeline(const Image& image, const Query& query,
                            const svc::BackendSet& backends, const PipelineConfig& config) {
    PlanningState state = stage1_reason(image, query, backends, config);
    state = verify_loop(std::move(state), backends, config);

    HypothesisRun hypotheses = run_hypotheses(image, query, state.occluder_labels(), backends,
                                              config, state.trace);

    PipelineResult result;
    result.hypotheses = hypotheses.items;
    result.selected = hypotheses.selected;
    result.warnings = hypotheses.warnings;

    std::vector<int> indices;
    if (config.enumerate_all_hypotheses) {
        for (int i = 0; i < static_cast<int>(hypotheses.items.size()); ++i) indices.push_back(i);
    } else {
        indices.push_back(hypotheses.selected);
    }

    for (int index : indices) {
        CompletionPlan plan = integrate_plan(state, hypotheses.items[index], config);
        Image completed =
            synthesize(plan, backends.inpaint_backend(), config.synthesis_seed, config, state.trace);
        plan.trace = state.trace;
        result.outputs.push_back(
            {std::move(completed), std::move(plan), hypotheses.items[index].weight, index});
    }
    result.trace = state.trace;
    for (auto& output : result.outputs) output.plan.trace = result.trace;
    return result;
}

bool trace_in_stage_order(const PipelineTrace& trace) {
    // Pipeline order: stage1.* -> verify.* -> hypotheses -> synthesis.
    auto rank = [](const std::string& stage) {
        if (stage.rfind("stage1.occlusion", 0) == 0) return 0;
        if (stage.rfind("stage1.segmentation", 0) == 0) return 1;
        if (stage.rfind("stage1.boundary", 0) == 0) return 2;
        if (stage.rfind("verify.", 0) == 0) return 3;
        if (stage.rfind("hypotheses", 0) == 0) return 4;
        if (stage.rfind("synthesis", 0) == 0) return 5;
        return 6;
    };
    int current = 0;
    for (const auto& entry : trace.entries) {
        const int r = rank(entry.stage);
        if (r < current) return false;
        current = r;
    }
    return true;
}

}  // namespace amodal
