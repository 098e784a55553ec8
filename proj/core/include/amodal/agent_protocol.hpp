// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "amodal/types.hpp"

namespace amodal::agents {

enum class AgentRole {
    Occlusion,
    Segmentation,
    Boundary,
    Verification,
    Hypothesis,
    JudgeCompleteness,
    JudgeConsistency,
};

const char* to_string(AgentRole role);

/// Deterministic prompt text plus image attachments. `template_version` is
/// "<name>-<content digest>", recorded in the pipeline trace.
struct RenderedPrompt {
    std::string text;
    std::vector<Image> images;
    std::string template_name;
    std::string template_version;
};

struct OcclusionContext {
    Image image;
    std::string query;
};

struct BoundaryContext {
    Image image;
    BinaryMask visible;
    std::string query;
    double ceiling = 2.0;
};

struct VerificationContext {
    Image whited_view;  // identified occluders already masked pure white
    std::string query;
    std::vector<std::string> known_occluders;
};

struct HypothesisContext {
    Image image;
    std::string query;
    int k = 3;
    std::vector<std::string> occluder_labels;
    bool single = false;  // deterministic single-description variant
};

struct JudgeContext {
    Image original;
    Image completed;
    std::string target;
};

RenderedPrompt render_occlusion_prompt(const OcclusionContext& ctx);
RenderedPrompt render_boundary_prompt(const BoundaryContext& ctx);
RenderedPrompt render_verification_prompt(const VerificationContext& ctx);
RenderedPrompt render_hypothesis_prompt(const HypothesisContext& ctx);
RenderedPrompt render_judge_prompt(AgentRole role, const JudgeContext& ctx);

/// "<name>-<digest>" of the template a role renders with.
std::string template_version(AgentRole role, bool single_variant = false);

// ---- typed responses ----

struct OcclusionResponse {
    struct Occluder {
        std::string id;
        std::string label;
    };
    std::vector<Occluder> occluders;
};

struct BoundaryResponse {
    Expansion expansion;
};

struct VerificationResponse {
    bool target_grounded = true;
    struct Candidate {
        std::string label;
        bool valid = false;
        std::string rule_applied;
        std::string justification;
    };
    std::vector<Candidate> candidates;

    /// Labels of candidates that survived filtering.
    std::vector<std::string> residual_labels() const;
};

struct HypothesisResponse {
    struct Item {
        std::string description;
        double raw_weight = 0.0;
    };
    std::vector<Item> items;
};

struct CompletenessVerdict {
    bool complete = false;
    std::string explanation;
};

struct ConsistencyVerdict {
    int structural = 0;
    int semantic = 0;
    int realism = 0;
    int total = 0;  // always recomputed from the sub-scores
    std::string explanation;
    std::vector<std::string> warnings;  // e.g. "total_mismatch"
};

/// First well-formed JSON object in `text`, fenced or bare.
/// Throws MalformedResponse when none parses.
std::string extract_json_block(const std::string& text);

OcclusionResponse parse_occlusion(const std::string& text);
BoundaryResponse parse_boundary(const std::string& text);
VerificationResponse parse_verification(const std::string& text);
HypothesisResponse parse_hypotheses(const std::string& text);
CompletenessVerdict parse_completeness(const std::string& text);
ConsistencyVerdict parse_consistency(const std::string& text);

using ParsedResponse = std::variant<OcclusionResponse, BoundaryResponse, VerificationResponse,
                                    HypothesisResponse, CompletenessVerdict, ConsistencyVerdict>;
ParsedResponse parse_response(AgentRole role, const std::string& text);

struct HypothesisSet {
    std::vector<Hypothesis> items;  // weights normalized to sum 1
    std::vector<std::string> warnings;
};

/// Divides weights by their sum, order preserved. All-zero or negative
/// weights fall back to uniform with a "degenerate_weights" warning.
HypothesisSet normalize_hypotheses(const HypothesisResponse& response);

/// Case-insensitive occluder-mention scan; one violation per matched label.
std::vector<std::string> lint_description(const std::string& description,
                                          const std::vector<std::string>& occluder_labels);

inline constexpr const char* kRepairSuffix = "\n\nRespond with only the JSON object.";
inline constexpr int kMaxPromptAttempts = 3;  // initial + exactly two repair re-prompts

/// Sends `prompt`, parses with `parse`, and on MalformedResponse or
/// SchemaViolation re-prompts with kRepairSuffix appended, at most
/// kMaxPromptAttempts total sends. Returns the value and the attempt count.
template <typename T>
std::pair<T, int> call_with_repair(const std::function<std::string(const std::string&)>& send,
                                   const std::string& prompt, T (*parse)(const std::string&)) {
    std::string current = prompt;
    for (int attempt = 1;; ++attempt) {
        const std::string reply = send(current);
        try {
            return {parse(reply), attempt};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::MalformedResponse && e.kind() != ErrorKind::SchemaViolation)
                throw;
            if (attempt >= kMaxPromptAttempts) throw;
            current = prompt + kRepairSuffix;
        }
    }
}

}  // namespace amodal::agents
