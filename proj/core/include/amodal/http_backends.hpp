// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "amodal/backends.hpp"
#include "amodal/service.hpp"

namespace amodal::svc {

struct HttpRequest {
    std::string method = "POST";
    std::string path;
    std::string content_type;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Transport seam: the real implementation speaks HTTP, tests substitute a
/// scripted one. Implementations throw TransportError on connect/timeout.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse send(const HttpRequest& request) = 0;
};

/// cpp-httplib transport for a base URL like "http://host:port".
std::shared_ptr<HttpTransport> make_httplib_transport(const std::string& base_url,
                                                      int timeout_seconds = 60);

struct ChatEndpointConfig {
    std::string model;
    double temperature = 0.0;
    std::string auth_token;  // empty = no Authorization header
    std::string path = "/v1/chat/completions";
};

/// Chat-completions client: role-tagged messages with inline base64 PNG
/// image parts. Request bodies are deterministic for fixed inputs.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(std::shared_ptr<HttpTransport> transport, ChatEndpointConfig config,
                    std::shared_ptr<RateLimiter> limiter = nullptr);

    std::string model_name() const override { return config_.model; }
    double temperature() const override { return config_.temperature; }
    std::string complete(AgentRole role, const std::string& prompt,
                         const std::vector<Image>& images) override;

    static std::string build_request_body(const std::string& model, double temperature,
                                          const std::string& prompt,
                                          const std::vector<Image>& images);

private:
    std::shared_ptr<HttpTransport> transport_;
    ChatEndpointConfig config_;
    std::shared_ptr<RateLimiter> limiter_;
};

inline constexpr const char* kMultipartBoundary = "amodalkit-multipart-boundary";

/// POST /segment with multipart {image, labels...}; response JSON
/// {"masks": [<base64 png>...], "scores": [...]}.
class HttpSegmentationBackend : public SegmentationBackend {
public:
    HttpSegmentationBackend(std::shared_ptr<HttpTransport> transport,
                            std::shared_ptr<RateLimiter> limiter = nullptr,
                            std::string path = "/segment");
    SegmentationResult segment(const Image& image, const std::vector<std::string>& labels) override;

    static std::string build_request_body(const Image& image,
                                          const std::vector<std::string>& labels);

private:
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<RateLimiter> limiter_;
    std::string path_;
};

/// POST /inpaint with multipart {image, mask, prompt, seed}; response body is
/// the completed PNG.
class HttpInpaintBackend : public InpaintBackend {
public:
    HttpInpaintBackend(std::shared_ptr<HttpTransport> transport,
                       std::shared_ptr<RateLimiter> limiter = nullptr,
                       std::string path = "/inpaint");
    Image inpaint(const Image& input, const BinaryMask& mask, const std::string& prompt,
                  std::uint64_t seed) override;

    static std::string build_request_body(const Image& input, const BinaryMask& mask,
                                          const std::string& prompt, std::uint64_t seed);

private:
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<RateLimiter> limiter_;
    std::string path_;
};

/// POST /distance with multipart {image_a, image_b}; response JSON
/// {"distance": <double>}.
class HttpEmbeddingBackend : public EmbeddingDistanceBackend {
public:
    HttpEmbeddingBackend(std::shared_ptr<HttpTransport> transport,
                         std::shared_ptr<RateLimiter> limiter = nullptr,
                         std::string path = "/distance");
    double distance(const Image& a, const Image& b) override;

private:
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<RateLimiter> limiter_;
    std::string path_;
};

}  // namespace amodal::svc
