// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/plan_io.hpp"

#include <filesystem>

#include <json.hpp>

#include "amodal/png_io.hpp"
#include "amodal/util.hpp"

namespace amodal {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ordered_json trace_to_json_value(const PipelineTrace& trace) {
    ordered_json entries = ordered_json::array();
    for (const auto& e : trace.entries) {
        entries.push_back({{"stage", e.stage},
                           {"role", e.role},
                           {"request_digest", e.request_digest},
                           {"response_digest", e.response_digest},
                           {"wall_ms", e.wall_ms},
                           {"attempts", e.attempts},
                           {"image_scale", e.image_scale}});
    }
    ordered_json versions = ordered_json::object();
    for (const auto& [name, version] : trace.template_versions) versions[name] = version;
    return {{"entries", entries},
            {"verification_rounds", trace.verification_rounds},
            {"selected_hypothesis", trace.selected_hypothesis},
            {"template_versions", versions}};
}

PipelineTrace trace_from_json_value(const nlohmann::json& doc) {
    PipelineTrace trace;
    for (const auto& e : doc.at("entries")) {
        TraceEntry entry;
        entry.stage = e.at("stage").get<std::string>();
        entry.role = e.at("role").get<std::string>();
        entry.request_digest = e.at("request_digest").get<std::string>();
        entry.response_digest = e.at("response_digest").get<std::string>();
        entry.wall_ms = e.at("wall_ms").get<double>();
        entry.attempts = e.at("attempts").get<int>();
        entry.image_scale = e.at("image_scale").get<double>();
        trace.entries.push_back(std::move(entry));
    }
    trace.verification_rounds = doc.at("verification_rounds").get<int>();
    trace.selected_hypothesis = doc.at("selected_hypothesis").get<int>();
    for (const auto& [name, version] : doc.at("template_versions").items())
        trace.template_versions[name] = version.get<std::string>();
    return trace;
}

}  // namespace

std::string trace_to_json(const PipelineTrace& trace) {
    return trace_to_json_value(trace).dump(2);
}

PipelineTrace trace_from_json(const std::string& text) {
    return trace_from_json_value(nlohmann::json::parse(text));
}

void write_plan_dir(const std::string& dir, const CompletionPlan& plan) {
    fs::create_directories(dir);
    write_png(dir + "/input.png", plan.input_composite);
    write_mask_png(dir + "/mask.png", plan.inpaint_mask);
    write_mask_png(dir + "/visible.png", plan.visible_mask);
    ordered_json doc = {
        {"description", plan.description},
        {"canvas_offset", {{"dx", plan.offset_x}, {"dy", plan.offset_y}}},
        {"expansion",
         {{"top", plan.expansion.top},
          {"bottom", plan.expansion.bottom},
          {"left", plan.expansion.left},
          {"right", plan.expansion.right}}},
        {"trace", trace_to_json_value(plan.trace)},
    };
    write_text_file(dir + "/plan.json", doc.dump(2) + "\n");
}

CompletionPlan read_plan_dir(const std::string& dir) {
    CompletionPlan plan;
    plan.input_composite = read_png(dir + "/input.png");
    plan.inpaint_mask = read_mask_png(dir + "/mask.png");
    plan.visible_mask = read_mask_png(dir + "/visible.png");
    const auto doc = nlohmann::json::parse(read_text_file(dir + "/plan.json"));
    plan.description = doc.at("description").get<std::string>();
    plan.offset_x = doc.at("canvas_offset").at("dx").get<int>();
    plan.offset_y = doc.at("canvas_offset").at("dy").get<int>();
    const auto& e = doc.at("expansion");
    plan.expansion = {e.at("top").get<double>(), e.at("bottom").get<double>(),
                      e.at("left").get<double>(), e.at("right").get<double>()};
    plan.trace = trace_from_json_value(doc.at("trace"));
    return plan;
}

}  // namespace amodal
