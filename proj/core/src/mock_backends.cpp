// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/mock_backends.hpp"

#include <algorithm>
#include <regex>

#include <json.hpp>

#include "amodal/mask_ops.hpp"
#include "amodal/metrics.hpp"
#include "amodal/util.hpp"

namespace amodal::svc {

namespace {

using nlohmann::ordered_json;

bool is_omitted(const SceneFixture& fx, const std::string& id) {
    return std::find(fx.stage1_omissions.begin(), fx.stage1_omissions.end(), id) !=
           fx.stage1_omissions.end();
}

BinaryMask nonwhite_mask(const Image& image) {
    BinaryMask mask(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (!(image.at(x, y) == kWhite)) mask.set(x, y);
    return mask;
}

BinaryMask crop_to_frame(const SceneFixture& fx, const BinaryMask& world) {
    BinaryMask frame(fx.frame_width, fx.frame_height);
    for (int y = 0; y < fx.frame_height; ++y)
        for (int x = 0; x < fx.frame_width; ++x)
            if (world.at(x + fx.offset_x(), y + fx.offset_y())) frame.set(x, y);
    return frame;
}

}  // namespace

FixtureChatBackend::FixtureChatBackend(std::shared_ptr<const SceneFixture> fixture)
    : fixture_(std::move(fixture)) {
    fixture_->validate();
}

std::string FixtureChatBackend::complete(AgentRole role, const std::string& prompt,
                                         const std::vector<Image>& images) {
    switch (role) {
        case AgentRole::Occlusion: return occlusion_reply();
        case AgentRole::Boundary: return boundary_reply();
        case AgentRole::Verification: return verification_reply(images);
        case AgentRole::Hypothesis: return hypothesis_reply(prompt);
        case AgentRole::JudgeCompleteness:
        case AgentRole::JudgeConsistency: return judge_reply(role, images);
        case AgentRole::Segmentation: break;
    }
    throw Error(ErrorKind::BadArgument, "fixture chat backend: unsupported role");
}

std::string FixtureChatBackend::occlusion_reply() const {
    ordered_json list = ordered_json::array();
    for (const auto* occluder : fixture_->occluders_of_target()) {
        if (is_omitted(*fixture_, occluder->id)) continue;
        list.push_back({{"id", occluder->id}, {"label", occluder->label}});
    }
    return ordered_json{{"occluders", list}}.dump();
}

std::string FixtureChatBackend::boundary_reply() const {
    const Expansion& e = fixture_->scripted_expansion;
    ordered_json expansion = {
        {"top", e.top}, {"bottom", e.bottom}, {"left", e.left}, {"right", e.right}};
    return ordered_json{{"expansion", expansion}}.dump();
}

std::string FixtureChatBackend::verification_reply(const std::vector<Image>& images) const {
    if (images.empty())
        throw Error(ErrorKind::BadArgument, "verification mock needs the white-out view");
    const Image& view = images.front();
    if (view.width() != fixture_->frame_width || view.height() != fixture_->frame_height)
        throw Error(ErrorKind::BadFixture, "verification view dims differ from fixture frame");

    ordered_json candidates = ordered_json::array();
    for (const auto& id : fixture_->stage1_omissions) {
        const auto& obj = fixture_->object(id);
        const BinaryMask visible = fixture_->visible_frame(id);
        std::size_t total = 0, whited = 0;
        for (int y = 0; y < view.height(); ++y) {
            for (int x = 0; x < view.width(); ++x) {
                if (!visible.at(x, y)) continue;
                ++total;
                if (view.at(x, y) == kWhite) ++whited;
            }
        }
        // Already masked out in the view means it was handled in an earlier
        // round; only still-visible omissions are residuals.
        if (total == 0 || whited * 2 >= total) continue;
        candidates.push_back({{"label", obj.label},
                              {"verdict", "valid"},
                              {"rule_applied", "none"},
                              {"justification",
                               "covers part of the target and is not yet masked"}});
    }
    const bool grounded = fixture_->visible_frame(fixture_->target_id).any();
    return ordered_json{{"target_grounded", grounded}, {"candidates", candidates}}.dump();
}

std::string FixtureChatBackend::hypothesis_reply(const std::string& prompt) const {
    std::size_t requested = 1;
    static const std::regex k_pattern("exactly ([0-9]+)");
    std::smatch match;
    if (std::regex_search(prompt, match, k_pattern))
        requested = static_cast<std::size_t>(std::stoul(match[1].str()));
    requested = std::min(requested, fixture_->hypotheses.size());
    requested = std::max<std::size_t>(requested, 1);

    ordered_json list = ordered_json::array();
    for (std::size_t i = 0; i < requested; ++i) {
        const auto& h = fixture_->hypotheses[i];
        list.push_back({{"description", h.description},
                        {"confidence", requested == 1 ? 1.0 : h.weight}});
    }
    return ordered_json{{"hypotheses", list}}.dump();
}

std::string FixtureChatBackend::judge_reply(AgentRole role, const std::vector<Image>& images) const {
    if (images.size() < 2)
        throw Error(ErrorKind::BadArgument, "judge mock needs original and completed images");
    const Image& completed = images[1];
    const BinaryMask object_pixels = nonwhite_mask(completed);

    // Structural completeness: the rendered object matches one of the
    // fixture's admissible target shapes (base amodal or scripted variants).
    bool complete = false;
    const bool world_dims = completed.width() == fixture_->world_width() &&
                            completed.height() == fixture_->world_height();
    const bool frame_dims = completed.width() == fixture_->frame_width &&
                            completed.height() == fixture_->frame_height;
    if (world_dims || frame_dims) {
        const BinaryMask frame = fixture_->frame_rect_world();
        for (int variant = -1; variant < static_cast<int>(fixture_->hypotheses.size()); ++variant) {
            BinaryMask amodal = fixture_->target_amodal_variant(variant);
            if (frame_dims && !world_dims) {
                // A shape that continues past the frame cannot be fully shown
                // on the unexpanded canvas; such a completion stays truncated.
                if (difference(amodal, frame).any()) continue;
                amodal = crop_to_frame(*fixture_, amodal);
            }
            if (object_pixels.same_dims(amodal) && iou(object_pixels, amodal) >= 0.99) {
                complete = true;
                break;
            }
        }
    }

    if (role == AgentRole::JudgeCompleteness) {
        return ordered_json{{"complete", complete},
                            {"explanation", complete
                                                ? "the object shows a full plausible structure"
                                                : "the object is truncated or missing parts"}}
            .dump();
    }
    const auto& scores =
        complete ? fixture_->judge.complete_scores : fixture_->judge.incomplete_scores;
    return ordered_json{{"structural", scores[0]},
                        {"semantic", scores[1]},
                        {"realism", scores[2]},
                        {"total", scores[0] + scores[1] + scores[2]},
                        {"explanation", "scripted fixture rubric"}}
        .dump();
}

FixtureSegmentationBackend::FixtureSegmentationBackend(std::shared_ptr<const SceneFixture> fixture)
    : fixture_(std::move(fixture)) {
    fixture_->validate();
}

SegmentationResult FixtureSegmentationBackend::segment(const Image& image,
                                                       const std::vector<std::string>& labels) {
    if (image.width() != fixture_->frame_width || image.height() != fixture_->frame_height)
        throw Error(ErrorKind::BadFixture, "segmentation request dims differ from fixture frame");
    SegmentationResult result;
    for (const auto& label : labels) {
        const auto* obj = fixture_->find_by_label(label);
        const bool is_target = obj && obj->id == fixture_->target_id;
        bool suppress = false;
        if (is_target) {
            // Scripted grounding failure: the multi-label stage-1 call misses
            // the target; the single-label re-segmentation query succeeds.
            if (fixture_->grounding == SceneFixture::Grounding::FailAlways) suppress = true;
            if (fixture_->grounding == SceneFixture::Grounding::FailOnce && labels.size() > 1)
                suppress = true;
        }
        if (!obj || suppress) {
            result.masks.emplace_back(fixture_->frame_width, fixture_->frame_height);
            result.scores.push_back(0.0);
        } else {
            result.masks.push_back(fixture_->visible_frame(obj->id));
            result.scores.push_back(0.9);
        }
    }
    return result;
}

FixtureInpaintBackend::FixtureInpaintBackend(std::shared_ptr<const SceneFixture> fixture)
    : fixture_(std::move(fixture)) {
    fixture_->validate();
}

Image FixtureInpaintBackend::inpaint(const Image& input, const BinaryMask& mask,
                                     const std::string& prompt, std::uint64_t seed) {
    if (mask.width() != input.width() || mask.height() != input.height())
        throw Error(ErrorKind::DimMismatch, "inpaint mask dims differ from input");

    int variant = -1;
    for (std::size_t i = 0; i < fixture_->hypotheses.size(); ++i) {
        if (prompt.find(fixture_->hypotheses[i].description) != std::string::npos) {
            variant = static_cast<int>(i);
            break;
        }
    }
    BinaryMask amodal = fixture_->target_amodal_variant(variant);
    const bool world_dims = input.width() == fixture_->world_width() &&
                            input.height() == fixture_->world_height();
    const bool frame_dims = input.width() == fixture_->frame_width &&
                            input.height() == fixture_->frame_height;
    if (!world_dims && frame_dims) amodal = crop_to_frame(*fixture_, amodal);
    else if (!world_dims)
        throw Error(ErrorKind::BadFixture, "inpaint request dims match neither frame nor world");

    const Rgb fill = fixture_->tinted_fill(seed);
    Image out = input;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (mask.at(x, y)) out.set(x, y, amodal.at(x, y) ? fill : kWhite);
    return out;
}

double MseDistanceBackend::distance(const Image& a, const Image& b) { return mse(a, b); }

std::string DigestJudgeBackend::complete(AgentRole role, const std::string&,
                                         const std::vector<Image>& images) {
    if (images.empty()) throw Error(ErrorKind::BadArgument, "digest judge needs images");
    const std::uint64_t h = mix64(fnv1a64(images.back().pixels()));
    if (role == AgentRole::JudgeCompleteness) {
        const bool complete = (h & 1) == 0;
        return ordered_json{{"complete", complete}, {"explanation", "digest verdict"}}.dump();
    }
    if (role == AgentRole::JudgeConsistency) {
        const int structural = static_cast<int>((h >> 8) % 5);
        const int semantic = static_cast<int>((h >> 16) % 5);
        const int realism = static_cast<int>((h >> 24) % 3);
        return ordered_json{{"structural", structural},
                            {"semantic", semantic},
                            {"realism", realism},
                            {"total", structural + semantic + realism},
                            {"explanation", "digest rubric"}}
            .dump();
    }
    throw Error(ErrorKind::BadArgument, "digest judge only answers judge roles");
}

BackendSet mock_from_fixture(std::shared_ptr<const SceneFixture> fixture) {
    fixture->validate();
    BackendSet set;
    auto chat = std::make_shared<FixtureChatBackend>(fixture);
    for (AgentRole role : {AgentRole::Occlusion, AgentRole::Boundary, AgentRole::Verification,
                           AgentRole::Hypothesis, AgentRole::JudgeCompleteness,
                           AgentRole::JudgeConsistency})
        set.chat[role] = chat;
    set.segmentation = std::make_shared<FixtureSegmentationBackend>(fixture);
    set.inpaint = std::make_shared<FixtureInpaintBackend>(fixture);
    set.embedding = std::make_shared<MseDistanceBackend>();
    return set;
}

}  // namespace amodal::svc
