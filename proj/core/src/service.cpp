// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/service.hpp"

#include <algorithm>
#include <thread>

#include "amodal/mask_ops.hpp"
#include "amodal/util.hpp"

namespace amodal::svc {

namespace {

void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

std::string request_digest(const std::string& prompt, const std::vector<Image>& images) {
    std::uint64_t h = fnv1a64(prompt);
    for (const auto& img : images) h ^= mix64(fnv1a64(img.pixels()));
    std::string hex;
    for (int i = 15; i >= 0; --i) {
        hex.push_back("0123456789abcdef"[(h >> (4 * i)) & 0xf]);
    }
    return hex;
}

template <typename Fn>
auto with_retries(Fn&& fn, const RetryPolicy& retry, TraceEntry& entry, const Sleeper& sleeper) {
    const Sleeper sleep_fn = sleeper ? sleeper : Sleeper(default_sleep);
    int delay_ms = retry.backoff_ms;
    const auto begin = std::chrono::steady_clock::now();
    for (int attempt = 1;; ++attempt) {
        entry.attempts = attempt;
        try {
            auto result = fn();
            entry.wall_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - begin)
                                .count();
            return result;
        } catch (const TransportError& e) {
            if (attempt >= retry.max_attempts) {
                entry.wall_ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - begin)
                                    .count();
                throw Error(ErrorKind::BackendUnavailable,
                            std::string("retries exhausted: ") + e.what());
            }
            sleep_fn(std::chrono::milliseconds(delay_ms));
            delay_ms = static_cast<int>(delay_ms * retry.multiplier);
        }
    }
}

}  // namespace

RateLimiter::RateLimiter(double requests_per_second, double burst)
    : RateLimiter(requests_per_second, burst,
                  [] { return std::chrono::steady_clock::now(); }, default_sleep) {}

RateLimiter::RateLimiter(double requests_per_second, double burst, Clock clock, Sleeper sleeper)
    : rate_(requests_per_second),
      burst_(std::max(1.0, burst)),
      tokens_(std::max(1.0, burst)),
      clock_(std::move(clock)),
      sleeper_(std::move(sleeper)) {
    if (rate_ <= 0) throw Error(ErrorKind::BadConfig, "rate limit must be > 0 req/s");
    last_ = clock_();
}

void RateLimiter::acquire() {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto now = clock_();
    tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    if (tokens_ < 1.0) {
        const double missing = 1.0 - tokens_;
        const auto wait = std::chrono::milliseconds(
            static_cast<long>(missing / rate_ * 1000.0) + 1);
        sleeper_(wait);
        last_ = clock_();
        tokens_ = std::min(burst_, 1.0);
    }
    tokens_ -= 1.0;
}

std::string chat(ChatBackend& backend, AgentRole role, const std::string& prompt,
                 const std::vector<Image>& images, const RetryPolicy& retry, int max_image_side,
                 TraceEntry& entry, const Sleeper& sleeper) {
    if (prompt.empty()) throw Error(ErrorKind::BadArgument, "chat prompt must be nonempty");
    std::vector<Image> scaled;
    scaled.reserve(images.size());
    double min_scale = 1.0;
    for (const auto& img : images) {
        auto [resized, scale] = resize_max_side(img, max_image_side);
        min_scale = std::min(min_scale, scale);
        scaled.push_back(std::move(resized));
    }
    entry.role = agents::to_string(role);
    entry.image_scale = min_scale;
    entry.request_digest = request_digest(prompt, scaled);
    const std::string reply = with_retries(
        [&] { return backend.complete(role, prompt, scaled); }, retry, entry, sleeper);
    entry.response_digest = digest_hex(reply);
    return reply;
}

SegmentationResult segment(SegmentationBackend& backend, const Image& image,
                           const std::vector<std::string>& labels, const RetryPolicy& retry,
                           TraceEntry& entry, const Sleeper& sleeper) {
    if (labels.empty()) throw Error(ErrorKind::BadArgument, "segment needs at least one label");
    entry.role = agents::to_string(AgentRole::Segmentation);
    std::string joined;
    for (const auto& l : labels) joined += l + "\n";
    entry.request_digest = request_digest(joined, {image});
    SegmentationResult result = with_retries(
        [&] { return backend.segment(image, labels); }, retry, entry, sleeper);
    if (result.masks.size() != labels.size())
        throw Error(ErrorKind::MalformedResponse, "segmentation returned wrong mask count");
    for (const auto& m : result.masks)
        if (m.width() != image.width() || m.height() != image.height())
            throw Error(ErrorKind::DimMismatch, "segmentation mask dims differ from request image");
    std::uint64_t h = 0;
    for (const auto& m : result.masks) h ^= mix64(fnv1a64(m.bits()));
    entry.response_digest = digest_hex(std::to_string(h));
    return result;
}

Image inpaint(InpaintBackend& backend, const Image& input, const BinaryMask& mask,
              const std::string& prompt, std::uint64_t seed, const RetryPolicy& retry,
              TraceEntry& entry, const Sleeper& sleeper) {
    if (mask.width() != input.width() || mask.height() != input.height())
        throw Error(ErrorKind::DimMismatch, "inpaint mask dims differ from input image");
    entry.role = "inpaint";
    entry.request_digest = request_digest(prompt + "#" + std::to_string(seed), {input});
    Image result = with_retries(
        [&] { return backend.inpaint(input, mask, prompt, seed); }, retry, entry, sleeper);
    if (!result.same_dims(input))
        throw Error(ErrorKind::MalformedResponse, "inpaint response dims differ from request");
    entry.response_digest = digest_hex(result.pixels());
    return result;
}

svc::ChatBackend& BackendSet::chat_for(AgentRole role) const {
    const auto it = chat.find(role);
    if (it == chat.end() || !it->second)
        throw Error(ErrorKind::BadConfig,
                    std::string("no chat backend configured for role ") + agents::to_string(role));
    return *it->second;
}

SegmentationBackend& BackendSet::segmentation_backend() const {
    if (!segmentation) throw Error(ErrorKind::BadConfig, "no segmentation backend configured");
    return *segmentation;
}

InpaintBackend& BackendSet::inpaint_backend() const {
    if (!inpaint) throw Error(ErrorKind::BadConfig, "no inpaint backend configured");
    return *inpaint;
}

}  // namespace amodal::svc
