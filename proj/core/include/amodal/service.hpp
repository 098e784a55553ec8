// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <functional>
#include <mutex>

#include "amodal/backends.hpp"
#include "amodal/config.hpp"

namespace amodal::svc {

using Clock = std::function<std::chrono::steady_clock::time_point()>;
using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Token bucket limiting request rate per backend; injectable clock/sleep
/// for testing.
class RateLimiter {
public:
    RateLimiter(double requests_per_second, double burst = 1.0);
    RateLimiter(double requests_per_second, double burst, Clock clock, Sleeper sleeper);

    /// Blocks until a token is available, then consumes it.
    void acquire();

private:
    double rate_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    Clock clock_;
    Sleeper sleeper_;
    std::mutex mutex_;
};

/// Retry/trace wrapper around ChatBackend::complete. Downscales attachments
/// to `max_image_side`, retries TransportError with exponential backoff, then
/// raises BackendUnavailable. 4xx (BackendRejected) is never retried.
/// Every attempt is reflected in the trace entry.
std::string chat(ChatBackend& backend, AgentRole role, const std::string& prompt,
                 const std::vector<Image>& images, const RetryPolicy& retry, int max_image_side,
                 TraceEntry& entry, const Sleeper& sleeper = {});

/// Same retry discipline for the segmentation and inpainting services.
SegmentationResult segment(SegmentationBackend& backend, const Image& image,
                           const std::vector<std::string>& labels, const RetryPolicy& retry,
                           TraceEntry& entry, const Sleeper& sleeper = {});
Image inpaint(InpaintBackend& backend, const Image& input, const BinaryMask& mask,
              const std::string& prompt, std::uint64_t seed, const RetryPolicy& retry,
              TraceEntry& entry, const Sleeper& sleeper = {});

}  // namespace amodal::svc
