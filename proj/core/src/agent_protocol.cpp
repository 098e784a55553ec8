// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/agent_protocol.hpp"

#include <json.hpp>

#include "amodal/util.hpp"
#include "prompt_data.hpp"

namespace amodal::agents {

namespace {

using nlohmann::json;

struct TemplateRef {
    const char* name;
    const char* text;
};

TemplateRef template_for(AgentRole role, bool single_variant) {
    switch (role) {
        case AgentRole::Occlusion: return {"occlusion_v1", templates::kOcclusionV1};
        case AgentRole::Boundary: return {"boundary_v1", templates::kBoundaryV1};
        case AgentRole::Verification: return {"verification_v1", templates::kVerificationV1};
        case AgentRole::Hypothesis:
            return single_variant ? TemplateRef{"hypothesis_single_v1", templates::kHypothesisSingleV1}
                                  : TemplateRef{"hypothesis_v1", templates::kHypothesisV1};
        case AgentRole::JudgeCompleteness:
            return {"judge_completeness_v1", templates::kJudgeCompletenessV1};
        case AgentRole::JudgeConsistency:
            return {"judge_consistency_v1", templates::kJudgeConsistencyV1};
        case AgentRole::Segmentation: break;
    }
    throw Error(ErrorKind::BadArgument, "role has no prompt template");
}

std::string render(const TemplateRef& tpl,
                   const std::vector<std::pair<std::string, std::string>>& values) {
    std::string text = tpl.text;
    for (const auto& [key, value] : values) text = replace_all(text, "{{" + key + "}}", value);
    if (text.find("{{") != std::string::npos)
        throw Error(ErrorKind::IncompleteContext,
                    std::string("unfilled placeholder in template ") + tpl.name);
    return text;
}

std::string version_of(const TemplateRef& tpl) {
    return std::string(tpl.name) + "-" + digest_hex(std::string(tpl.text));
}

void require(bool condition, const char* what) {
    if (!condition) throw Error(ErrorKind::IncompleteContext, what);
}

std::string join_labels(const std::vector<std::string>& labels) {
    if (labels.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += labels[i];
    }
    return out;
}

Image mask_to_image(const BinaryMask& mask) {
    Image img(mask.width(), mask.height(), Rgb{0, 0, 0});
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) img.set(x, y, kWhite);
    return img;
}

json must_object(const std::string& text) {
    const std::string block = extract_json_block(text);
    return json::parse(block);
}

const json& field(const json& obj, const char* key) {
    if (!obj.contains(key))
        throw Error(ErrorKind::SchemaViolation, std::string("missing field ") + key, key);
    return obj.at(key);
}

int int_in_range(const json& obj, const char* key, int lo, int hi) {
    const json& v = field(obj, key);
    if (!v.is_number_integer())
        throw Error(ErrorKind::SchemaViolation, std::string(key) + " must be an integer", key);
    const int n = v.get<int>();
    if (n < lo || n > hi)
        throw Error(ErrorKind::SchemaViolation,
                    std::string(key) + " out of range [" + std::to_string(lo) + "," +
                        std::to_string(hi) + "]",
                    key);
    return n;
}

}  // namespace

const char* to_string(AgentRole role) {
    switch (role) {
        case AgentRole::Occlusion: return "occlusion";
        case AgentRole::Segmentation: return "segmentation";
        case AgentRole::Boundary: return "boundary";
        case AgentRole::Verification: return "verification";
        case AgentRole::Hypothesis: return "hypothesis";
        case AgentRole::JudgeCompleteness: return "judge_completeness";
        case AgentRole::JudgeConsistency: return "judge_consistency";
    }
    return "unknown";
}

std::string template_version(AgentRole role, bool single_variant) {
    return version_of(template_for(role, single_variant));
}

RenderedPrompt render_occlusion_prompt(const OcclusionContext& ctx) {
    require(!ctx.query.empty(), "occlusion prompt needs a query");
    require(!ctx.image.empty(), "occlusion prompt needs the observed image");
    const auto tpl = template_for(AgentRole::Occlusion, false);
    return {render(tpl, {{"query", ctx.query}}), {ctx.image}, tpl.name, version_of(tpl)};
}

RenderedPrompt render_boundary_prompt(const BoundaryContext& ctx) {
    require(!ctx.query.empty(), "boundary prompt needs a query");
    require(!ctx.image.empty(), "boundary prompt needs the observed image");
    require(ctx.visible.width() == ctx.image.width() && ctx.visible.height() == ctx.image.height(),
            "boundary prompt needs the visible mask at image dims");
    const auto box = ctx.visible.bounding_box();
    const std::string bbox = box.valid()
                                 ? "(" + std::to_string(box.x0) + "," + std::to_string(box.y0) +
                                       ")-(" + std::to_string(box.x1) + "," + std::to_string(box.y1) + ")"
                                 : "(empty)";
    const auto tpl = template_for(AgentRole::Boundary, false);
    std::string text = render(tpl, {{"query", ctx.query},
                                    {"width", std::to_string(ctx.image.width())},
                                    {"height", std::to_string(ctx.image.height())},
                                    {"bbox", bbox},
                                    {"ceiling", format_fixed(ctx.ceiling, 1)}});
    return {std::move(text), {ctx.image, mask_to_image(ctx.visible)}, tpl.name, version_of(tpl)};
}

RenderedPrompt render_verification_prompt(const VerificationContext& ctx) {
    require(!ctx.query.empty(), "verification prompt needs a query");
    require(!ctx.whited_view.empty(), "verification prompt needs the whited view");
    const auto tpl = template_for(AgentRole::Verification, false);
    std::string text = render(tpl, {{"query", ctx.query},
                                    {"known_occluders", join_labels(ctx.known_occluders)}});
    return {std::move(text), {ctx.whited_view}, tpl.name, version_of(tpl)};
}

RenderedPrompt render_hypothesis_prompt(const HypothesisContext& ctx) {
    require(!ctx.query.empty(), "hypothesis prompt needs a query");
    require(!ctx.image.empty(), "hypothesis prompt needs the observed image");
    require(ctx.k >= 1, "hypothesis prompt needs k >= 1");
    const auto tpl = template_for(AgentRole::Hypothesis, ctx.single);
    std::vector<std::pair<std::string, std::string>> values = {
        {"query", ctx.query}, {"occluder_list", join_labels(ctx.occluder_labels)}};
    if (!ctx.single) values.emplace_back("k", std::to_string(ctx.k));
    return {render(tpl, values), {ctx.image}, tpl.name, version_of(tpl)};
}

RenderedPrompt render_judge_prompt(AgentRole role, const JudgeContext& ctx) {
    if (role != AgentRole::JudgeCompleteness && role != AgentRole::JudgeConsistency)
        throw Error(ErrorKind::BadArgument, "not a judge role");
    require(!ctx.target.empty(), "judge prompt needs the target name");
    require(!ctx.original.empty() && !ctx.completed.empty(), "judge prompt needs both images");
    const auto tpl = template_for(role, false);
    return {render(tpl, {{"target", ctx.target}}), {ctx.original, ctx.completed}, tpl.name,
            version_of(tpl)};
}

std::string extract_json_block(const std::string& text) {
    // Fenced block first.
    for (const std::string fence : {"```json", "```"}) {
        const std::size_t open = text.find(fence);
        if (open == std::string::npos) continue;
        const std::size_t body = open + fence.size();
        const std::size_t close = text.find("```", body);
        if (close == std::string::npos) continue;
        std::string inner = text.substr(body, close - body);
        while (!inner.empty() && (inner.back() == '\n' || inner.back() == '\r' ||
                                  inner.back() == ' ' || inner.back() == '\t'))
            inner.pop_back();
        const std::size_t brace = inner.find('{');
        if (brace == std::string::npos) continue;
        if (!json::accept(inner.substr(brace))) continue;
        return inner.substr(brace);
    }
    // Otherwise the first balanced object that parses.
    for (std::size_t start = text.find('{'); start != std::string::npos;
         start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '{') ++depth;
            else if (c == '}') {
                if (--depth == 0) {
                    const std::string candidate = text.substr(start, i - start + 1);
                    if (json::accept(candidate)) return candidate;
                    break;
                }
            }
        }
    }
    throw Error(ErrorKind::MalformedResponse, "no parseable JSON object in response");
}

OcclusionResponse parse_occlusion(const std::string& text) {
    const json doc = must_object(text);
    const json& list = field(doc, "occluders");
    if (!list.is_array())
        throw Error(ErrorKind::SchemaViolation, "occluders must be an array", "occluders");
    OcclusionResponse out;
    std::vector<std::string> seen;
    for (const auto& item : list) {
        OcclusionResponse::Occluder o;
        o.label = field(item, "label").get<std::string>();
        o.id = item.contains("id") ? item["id"].get<std::string>() : o.label;
        if (o.label.empty())
            throw Error(ErrorKind::SchemaViolation, "occluder label must be nonempty", "label");
        for (const auto& s : seen)
            if (s == o.id)
                throw Error(ErrorKind::SchemaViolation, "duplicate occluder id " + o.id, "id");
        seen.push_back(o.id);
        out.occluders.push_back(std::move(o));
    }
    return out;
}

BoundaryResponse parse_boundary(const std::string& text) {
    const json doc = must_object(text);
    const json& e = field(doc, "expansion");
    BoundaryResponse out;
    auto ratio = [&](const char* key) {
        const json& v = field(e, key);
        if (!v.is_number())
            throw Error(ErrorKind::SchemaViolation, std::string(key) + " must be a number", key);
        const double d = v.get<double>();
        if (d < 0)
            throw Error(ErrorKind::SchemaViolation, std::string(key) + " must be >= 0", key);
        return d;
    };
    out.expansion = {ratio("top"), ratio("bottom"), ratio("left"), ratio("right")};
    return out;
}

VerificationResponse parse_verification(const std::string& text) {
    const json doc = must_object(text);
    VerificationResponse out;
    const json& grounded = field(doc, "target_grounded");
    if (!grounded.is_boolean())
        throw Error(ErrorKind::SchemaViolation, "target_grounded must be a boolean",
                    "target_grounded");
    out.target_grounded = grounded.get<bool>();
    const json& list = field(doc, "candidates");
    if (!list.is_array())
        throw Error(ErrorKind::SchemaViolation, "candidates must be an array", "candidates");
    for (const auto& item : list) {
        VerificationResponse::Candidate c;
        c.label = field(item, "label").get<std::string>();
        const std::string verdict = field(item, "verdict").get<std::string>();
        if (verdict == "valid") c.valid = true;
        else if (verdict == "excluded") c.valid = false;
        else
            throw Error(ErrorKind::SchemaViolation, "verdict must be valid|excluded", "verdict");
        c.justification = field(item, "justification").get<std::string>();
        if (c.justification.empty())
            throw Error(ErrorKind::SchemaViolation, "candidate needs a justification",
                        "justification");
        c.rule_applied = item.contains("rule_applied") ? item["rule_applied"].get<std::string>() : "";
        out.candidates.push_back(std::move(c));
    }
    return out;
}

std::vector<std::string> VerificationResponse::residual_labels() const {
    std::vector<std::string> labels;
    for (const auto& c : candidates)
        if (c.valid) labels.push_back(c.label);
    return labels;
}

HypothesisResponse parse_hypotheses(const std::string& text) {
    const json doc = must_object(text);
    const json& list = field(doc, "hypotheses");
    if (!list.is_array() || list.empty())
        throw Error(ErrorKind::SchemaViolation, "hypotheses must be a nonempty array", "hypotheses");
    HypothesisResponse out;
    for (const auto& item : list) {
        HypothesisResponse::Item h;
        h.description = field(item, "description").get<std::string>();
        if (h.description.empty())
            throw Error(ErrorKind::SchemaViolation, "description must be nonempty", "description");
        const json& w = field(item, "confidence");
        if (!w.is_number())
            throw Error(ErrorKind::SchemaViolation, "confidence must be a number", "confidence");
        h.raw_weight = w.get<double>();
        out.items.push_back(std::move(h));
    }
    return out;
}

CompletenessVerdict parse_completeness(const std::string& text) {
    const json doc = must_object(text);
    const json& c = field(doc, "complete");
    if (!c.is_boolean())
        throw Error(ErrorKind::SchemaViolation, "complete must be a boolean", "complete");
    CompletenessVerdict out;
    out.complete = c.get<bool>();
    out.explanation = doc.contains("explanation") ? doc["explanation"].get<std::string>() : "";
    return out;
}

ConsistencyVerdict parse_consistency(const std::string& text) {
    const json doc = must_object(text);
    ConsistencyVerdict out;
    out.structural = int_in_range(doc, "structural", 0, 4);
    out.semantic = int_in_range(doc, "semantic", 0, 4);
    out.realism = int_in_range(doc, "realism", 0, 2);
    const int sum = out.structural + out.semantic + out.realism;
    if (doc.contains("total")) {
        const json& t = doc["total"];
        if (!t.is_number_integer())
            throw Error(ErrorKind::SchemaViolation, "total must be an integer", "total");
        if (t.get<int>() != sum) out.warnings.push_back("total_mismatch");
    }
    out.total = sum;
    out.explanation = doc.contains("explanation") ? doc["explanation"].get<std::string>() : "";
    return out;
}

ParsedResponse parse_response(AgentRole role, const std::string& text) {
    switch (role) {
        case AgentRole::Occlusion: return parse_occlusion(text);
        case AgentRole::Boundary: return parse_boundary(text);
        case AgentRole::Verification: return parse_verification(text);
        case AgentRole::Hypothesis: return parse_hypotheses(text);
        case AgentRole::JudgeCompleteness: return parse_completeness(text);
        case AgentRole::JudgeConsistency: return parse_consistency(text);
        case AgentRole::Segmentation: break;
    }
    throw Error(ErrorKind::BadArgument, "role has no text response parser");
}

HypothesisSet normalize_hypotheses(const HypothesisResponse& response) {
    if (response.items.empty())
        throw Error(ErrorKind::SchemaViolation, "no hypotheses to normalize", "hypotheses");
    HypothesisSet out;
    double sum = 0.0;
    bool degenerate = false;
    for (const auto& item : response.items) {
        if (item.raw_weight < 0) degenerate = true;
        sum += item.raw_weight;
    }
    if (degenerate || sum <= 0.0) {
        const double uniform = 1.0 / static_cast<double>(response.items.size());
        for (const auto& item : response.items) out.items.push_back({item.description, uniform});
        out.warnings.push_back("degenerate_weights");
        return out;
    }
    for (const auto& item : response.items)
        out.items.push_back({item.description, item.raw_weight / sum});
    return out;
}

std::vector<std::string> lint_description(const std::string& description,
                                          const std::vector<std::string>& occluder_labels) {
    std::vector<std::string> violations;
    const std::string haystack = to_lower(description);
    for (const auto& label : occluder_labels) {
        const std::string needle = to_lower(label);
        if (needle.empty()) continue;
        if (haystack.find(needle) != std::string::npos)
            violations.push_back("mentions occluder: " + label);
    }
    return violations;
}

}  // namespace amodal::agents
