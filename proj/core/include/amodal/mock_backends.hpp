// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>

#include "amodal/backends.hpp"
#include "amodal/scene_fixture.hpp"

namespace amodal::svc {

/// Scripted reasoning backend for every chat role, a pure function of
/// (fixture, request). The verification role inspects the attached white-out
/// view, so residuals disappear once they have been handled. Judge roles
/// verify the completed object against the fixture's admissible shapes.
class FixtureChatBackend : public ChatBackend {
public:
    explicit FixtureChatBackend(std::shared_ptr<const SceneFixture> fixture);

    std::string model_name() const override { return "fixture-mock"; }
    double temperature() const override { return 0.0; }
    std::string complete(AgentRole role, const std::string& prompt,
                         const std::vector<Image>& images) override;

private:
    std::string occlusion_reply() const;
    std::string boundary_reply() const;
    std::string verification_reply(const std::vector<Image>& images) const;
    std::string hypothesis_reply(const std::string& prompt) const;
    std::string judge_reply(AgentRole role, const std::vector<Image>& images) const;

    std::shared_ptr<const SceneFixture> fixture_;
};

/// Rasterizes visible masks from the z-ordered amodal ground truth.
class FixtureSegmentationBackend : public SegmentationBackend {
public:
    explicit FixtureSegmentationBackend(std::shared_ptr<const SceneFixture> fixture);
    SegmentationResult segment(const Image& image, const std::vector<std::string>& labels) override;

private:
    std::shared_ptr<const SceneFixture> fixture_;
};

/// Fills the masked region from the ground-truth amodal rendering. The plan
/// description selects a hypothesis variant; the seed applies the fixture's
/// scripted tint (amplitude 0 = exact ground truth).
class FixtureInpaintBackend : public InpaintBackend {
public:
    explicit FixtureInpaintBackend(std::shared_ptr<const SceneFixture> fixture);
    Image inpaint(const Image& input, const BinaryMask& mask, const std::string& prompt,
                  std::uint64_t seed) override;

private:
    std::shared_ptr<const SceneFixture> fixture_;
};

/// Pixel mean-squared-error as an embedding-distance stand-in.
class MseDistanceBackend : public EmbeddingDistanceBackend {
public:
    double distance(const Image& a, const Image& b) override;
};

/// Deterministic pseudo-judge: verdicts derive from the digest of the
/// completed image. Made for stability protocols where the requirement is
/// exact repeatability, not judgment quality.
class DigestJudgeBackend : public ChatBackend {
public:
    std::string model_name() const override { return "digest-judge"; }
    double temperature() const override { return 0.0; }
    std::string complete(AgentRole role, const std::string& prompt,
                         const std::vector<Image>& images) override;
};

/// Full backend set for one fixture. Throws BadFixture if the fixture is
/// invalid.
BackendSet mock_from_fixture(std::shared_ptr<const SceneFixture> fixture);

}  // namespace amodal::svc
