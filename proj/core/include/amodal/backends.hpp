// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "amodal/agent_protocol.hpp"
#include "amodal/types.hpp"

namespace amodal::svc {

using agents::AgentRole;

/// One reasoning endpoint. Implementations raise TransportError for
/// retryable transport failures and Error(BackendRejected) for 4xx.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string model_name() const = 0;
    virtual double temperature() const = 0;
    virtual std::string complete(AgentRole role, const std::string& prompt,
                                 const std::vector<Image>& images) = 0;
};

struct SegmentationResult {
    std::vector<BinaryMask> masks;   // one per requested label, request dims
    std::vector<double> scores;
};

class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;
    virtual SegmentationResult segment(const Image& image,
                                       const std::vector<std::string>& labels) = 0;
};

class InpaintBackend {
public:
    virtual ~InpaintBackend() = default;
    virtual Image inpaint(const Image& input, const BinaryMask& mask, const std::string& prompt,
                          std::uint64_t seed) = 0;
};

class EmbeddingDistanceBackend {
public:
    virtual ~EmbeddingDistanceBackend() = default;
    virtual double distance(const Image& a, const Image& b) = 0;
};

/// Role-to-backend wiring for one pipeline run. Reasoning roles may share a
/// backend or map to different ones.
struct BackendSet {
    std::map<AgentRole, std::shared_ptr<ChatBackend>> chat;
    std::shared_ptr<SegmentationBackend> segmentation;
    std::shared_ptr<InpaintBackend> inpaint;
    std::shared_ptr<EmbeddingDistanceBackend> embedding;

    ChatBackend& chat_for(AgentRole role) const;
    SegmentationBackend& segmentation_backend() const;
    InpaintBackend& inpaint_backend() const;
};

}  // namespace amodal::svc
