// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/http_backends.hpp"

#include <httplib.h>

#include <json.hpp>

#include "amodal/png_io.hpp"
#include "amodal/util.hpp"

namespace amodal::svc {

namespace {

using ordered_json = nlohmann::ordered_json;

class HttplibTransport : public HttpTransport {
public:
    HttplibTransport(std::string base_url, int timeout_seconds)
        : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}

    HttpResponse send(const HttpRequest& request) override {
        httplib::Client client(base_url_);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        client.set_write_timeout(timeout_seconds_, 0);
        httplib::Headers headers;
        for (const auto& [k, v] : request.headers) headers.emplace(k, v);
        httplib::Result result =
            request.method == "GET"
                ? client.Get(request.path, headers)
                : client.Post(request.path, headers, request.body, request.content_type);
        if (!result)
            throw TransportError("http transport: " + httplib::to_string(result.error()));
        return {result->status, result->body};
    }

private:
    std::string base_url_;
    int timeout_seconds_;
};

// Shared response policy: 2xx passes, 4xx is a hard rejection, everything
// else is retryable.
void check_status(const HttpResponse& response) {
    if (response.status >= 200 && response.status < 300) return;
    if (response.status >= 400 && response.status < 500)
        throw Error(ErrorKind::BackendRejected,
                    "http status " + std::to_string(response.status));
    throw TransportError("http status " + std::to_string(response.status), response.status);
}

std::string multipart_text_part(const std::string& name, const std::string& value) {
    std::string part;
    part += "--";
    part += kMultipartBoundary;
    part += "\r\nContent-Disposition: form-data; name=\"" + name + "\"\r\n\r\n";
    part += value;
    part += "\r\n";
    return part;
}

std::string multipart_file_part(const std::string& name, const std::string& filename,
                                std::span<const std::uint8_t> bytes) {
    std::string part;
    part += "--";
    part += kMultipartBoundary;
    part += "\r\nContent-Disposition: form-data; name=\"" + name + "\"; filename=\"" + filename +
            "\"\r\nContent-Type: image/png\r\n\r\n";
    part.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    part += "\r\n";
    return part;
}

std::string multipart_close() { return "--" + std::string(kMultipartBoundary) + "--\r\n"; }

std::string multipart_content_type() {
    return "multipart/form-data; boundary=" + std::string(kMultipartBoundary);
}

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport(const std::string& base_url,
                                                      int timeout_seconds) {
    return std::make_shared<HttplibTransport>(base_url, timeout_seconds);
}

HttpChatBackend::HttpChatBackend(std::shared_ptr<HttpTransport> transport,
                                 ChatEndpointConfig config, std::shared_ptr<RateLimiter> limiter)
    : transport_(std::move(transport)), config_(std::move(config)), limiter_(std::move(limiter)) {
    if (config_.model.empty()) throw Error(ErrorKind::BadConfig, "chat backend needs a model name");
}

std::string HttpChatBackend::build_request_body(const std::string& model, double temperature,
                                                const std::string& prompt,
                                                const std::vector<Image>& images) {
    ordered_json content = ordered_json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    for (const auto& image : images) {
        const auto png = encode_png(image);
        content.push_back(
            {{"type", "image_url"},
             {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
    }
    ordered_json body = {
        {"model", model},
        {"temperature", temperature},
        {"messages", ordered_json::array({{{"role", "user"}, {"content", content}}})},
    };
    return body.dump();
}

std::string HttpChatBackend::complete(AgentRole, const std::string& prompt,
                                      const std::vector<Image>& images) {
    if (limiter_) limiter_->acquire();
    HttpRequest request;
    request.path = config_.path;
    request.content_type = "application/json";
    request.body = build_request_body(config_.model, config_.temperature, prompt, images);
    if (!config_.auth_token.empty())
        request.headers.emplace_back("Authorization", "Bearer " + config_.auth_token);
    const HttpResponse response = transport_->send(request);
    check_status(response);
    try {
        const auto doc = nlohmann::json::parse(response.body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedResponse,
                    std::string("chat completions response: ") + e.what());
    }
}

HttpSegmentationBackend::HttpSegmentationBackend(std::shared_ptr<HttpTransport> transport,
                                                 std::shared_ptr<RateLimiter> limiter,
                                                 std::string path)
    : transport_(std::move(transport)), limiter_(std::move(limiter)), path_(std::move(path)) {}

std::string HttpSegmentationBackend::build_request_body(const Image& image,
                                                        const std::vector<std::string>& labels) {
    std::string body = multipart_file_part("image", "image.png", encode_png(image));
    for (const auto& label : labels) body += multipart_text_part("labels", label);
    body += multipart_close();
    return body;
}

SegmentationResult HttpSegmentationBackend::segment(const Image& image,
                                                    const std::vector<std::string>& labels) {
    if (limiter_) limiter_->acquire();
    HttpRequest request;
    request.path = path_;
    request.content_type = multipart_content_type();
    request.body = build_request_body(image, labels);
    const HttpResponse response = transport_->send(request);
    check_status(response);
    try {
        const auto doc = nlohmann::json::parse(response.body);
        SegmentationResult result;
        for (const auto& encoded : doc.at("masks")) {
            const std::string b64 = encoded.get<std::string>();
            std::vector<std::uint8_t> bytes;
            bytes.reserve(b64.size());
            // minimal base64 decode; segmentation services return padded output
            static const auto value_of = [](char c) -> int {
                if (c >= 'A' && c <= 'Z') return c - 'A';
                if (c >= 'a' && c <= 'z') return c - 'a' + 26;
                if (c >= '0' && c <= '9') return c - '0' + 52;
                if (c == '+') return 62;
                if (c == '/') return 63;
                return -1;
            };
            int buffer = 0, bits = 0;
            for (char c : b64) {
                const int v = value_of(c);
                if (v < 0) continue;
                buffer = (buffer << 6) | v;
                bits += 6;
                if (bits >= 8) {
                    bits -= 8;
                    bytes.push_back(static_cast<std::uint8_t>((buffer >> bits) & 0xff));
                }
            }
            result.masks.push_back(decode_mask_png(bytes));
        }
        if (doc.contains("scores"))
            result.scores = doc["scores"].get<std::vector<double>>();
        else
            result.scores.assign(result.masks.size(), 1.0);
        return result;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedResponse, std::string("segment response: ") + e.what());
    }
}

HttpInpaintBackend::HttpInpaintBackend(std::shared_ptr<HttpTransport> transport,
                                       std::shared_ptr<RateLimiter> limiter, std::string path)
    : transport_(std::move(transport)), limiter_(std::move(limiter)), path_(std::move(path)) {}

std::string HttpInpaintBackend::build_request_body(const Image& input, const BinaryMask& mask,
                                                   const std::string& prompt, std::uint64_t seed) {
    std::string body = multipart_file_part("image", "image.png", encode_png(input));
    body += multipart_file_part("mask", "mask.png", encode_mask_png(mask));
    body += multipart_text_part("prompt", prompt);
    body += multipart_text_part("seed", std::to_string(seed));
    body += multipart_close();
    return body;
}

Image HttpInpaintBackend::inpaint(const Image& input, const BinaryMask& mask,
                                  const std::string& prompt, std::uint64_t seed) {
    if (limiter_) limiter_->acquire();
    HttpRequest request;
    request.path = path_;
    request.content_type = multipart_content_type();
    request.body = build_request_body(input, mask, prompt, seed);
    const HttpResponse response = transport_->send(request);
    check_status(response);
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(response.body.data());
    return decode_png(std::span<const std::uint8_t>(bytes, response.body.size()));
}

HttpEmbeddingBackend::HttpEmbeddingBackend(std::shared_ptr<HttpTransport> transport,
                                           std::shared_ptr<RateLimiter> limiter, std::string path)
    : transport_(std::move(transport)), limiter_(std::move(limiter)), path_(std::move(path)) {}

double HttpEmbeddingBackend::distance(const Image& a, const Image& b) {
    if (limiter_) limiter_->acquire();
    HttpRequest request;
    request.path = path_;
    request.content_type = multipart_content_type();
    std::string body = multipart_file_part("image_a", "a.png", encode_png(a));
    body += multipart_file_part("image_b", "b.png", encode_png(b));
    body += multipart_close();
    request.body = std::move(body);
    const HttpResponse response = transport_->send(request);
    check_status(response);
    try {
        const double d = nlohmann::json::parse(response.body).at("distance").get<double>();
        if (d < 0) throw Error(ErrorKind::MalformedResponse, "embedding distance must be >= 0");
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedResponse, std::string("distance response: ") + e.what());
    }
}

}  // namespace amodal::svc
