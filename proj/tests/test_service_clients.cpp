// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <memory>

#include <httplib.h>
#include <json.hpp>

#include "amodal/http_backends.hpp"
#include "amodal/mask_ops.hpp"
#include "amodal/mock_backends.hpp"
#include "amodal/png_io.hpp"
#include "amodal/scene_fixture.hpp"
#include "amodal/service.hpp"
#include "amodal/util.hpp"
#include "test_support.hpp"

using namespace amodal;
using namespace amodal::svc;
using testsupport::fixture_path;

namespace {

struct CapturingTransport : HttpTransport {
    std::vector<HttpRequest> requests;
    std::function<HttpResponse(const HttpRequest&)> responder;

    HttpResponse send(const HttpRequest& request) override {
        requests.push_back(request);
        return responder(request);
    }
};

Image two_by_two() {
    Image img(2, 2);
    img.set(0, 0, {255, 0, 0});
    img.set(1, 0, {0, 255, 0});
    img.set(0, 1, {0, 0, 255});
    img.set(1, 1, {255, 255, 0});
    return img;
}

Sleeper no_sleep() {
    return [](std::chrono::milliseconds) {};
}

}  // namespace

TEST_CASE("chat request body matches the golden wire format byte-for-byte") {
    auto transport = std::make_shared<CapturingTransport>();
    transport->responder = [](const HttpRequest&) {
        return HttpResponse{200, R"({"choices":[{"message":{"content":"hello"}}]})"};
    };
    HttpChatBackend backend(transport, {"gpt-test", 0.0, "secret-token"});

    TraceEntry entry;
    entry.stage = "test";
    const std::string reply = chat(backend, agents::AgentRole::Occlusion, "describe the scene",
                                   {two_by_two()}, RetryPolicy{1, 1, 1.0}, 1024, entry, no_sleep());
    CHECK(reply == "hello");
    REQUIRE(transport->requests.size() == 1);
    const auto& request = transport->requests[0];
    CHECK(request.path == "/v1/chat/completions");
    CHECK(request.content_type == "application/json");
    REQUIRE(request.headers.size() == 1);
    CHECK(request.headers[0].first == "Authorization");
    CHECK(request.headers[0].second == "Bearer secret-token");

    const std::string golden = read_text_file(std::string(AMODAL_GOLDEN_DIR) + "/chat_request.json");
    CHECK(request.body == golden);

    // Independently assembled skeleton pins the message structure.
    const std::string b64 = base64_encode(encode_png(two_by_two()));
    const std::string expected =
        std::string(R"({"model":"gpt-test","temperature":0.0,"messages":[{"role":"user",)") +
        R"("content":[{"type":"text","text":"describe the scene"},)" +
        R"({"type":"image_url","image_url":{"url":"data:image/png;base64,)" + b64 +
        R"("}}]}]})";
    CHECK(request.body == expected);
}

TEST_CASE("chat retries transport failures then succeeds, attempts recorded") {
    auto transport = std::make_shared<CapturingTransport>();
    int failures = 2;
    transport->responder = [&](const HttpRequest&) -> HttpResponse {
        if (failures-- > 0) throw TransportError("connection refused");
        return HttpResponse{200, R"({"choices":[{"message":{"content":"ok"}}]})"};
    };
    HttpChatBackend backend(transport, {"gpt-test", 0.0, ""});
    TraceEntry entry;
    const std::string reply = chat(backend, agents::AgentRole::Occlusion, "p", {},
                                   RetryPolicy{3, 1, 2.0}, 1024, entry, no_sleep());
    CHECK(reply == "ok");
    CHECK(entry.attempts == 3);  // retry_count == 2
    CHECK(transport->requests.size() == 3);
}

TEST_CASE("chat surfaces a 401 immediately with zero retries") {
    auto transport = std::make_shared<CapturingTransport>();
    transport->responder = [](const HttpRequest&) { return HttpResponse{401, "unauthorized"}; };
    HttpChatBackend backend(transport, {"gpt-test", 0.0, "bad-token"});
    TraceEntry entry;
    CHECK_THROWS_WITH_AS(chat(backend, agents::AgentRole::Occlusion, "p", {},
                              RetryPolicy{5, 1, 2.0}, 1024, entry, no_sleep()),
                         doctest::Contains("BackendRejected"), Error);
    CHECK(transport->requests.size() == 1);
}

TEST_CASE("exhausted retries become BackendUnavailable") {
    auto transport = std::make_shared<CapturingTransport>();
    transport->responder = [](const HttpRequest&) -> HttpResponse {
        throw TransportError("timeout");
    };
    HttpChatBackend backend(transport, {"gpt-test", 0.0, ""});
    TraceEntry entry;
    CHECK_THROWS_WITH_AS(chat(backend, agents::AgentRole::Occlusion, "p", {},
                              RetryPolicy{3, 1, 2.0}, 1024, entry, no_sleep()),
                         doctest::Contains("BackendUnavailable"), Error);
    CHECK(entry.attempts == 3);
}

TEST_CASE("chat attachments are downscaled to the configured side") {
    auto transport = std::make_shared<CapturingTransport>();
    transport->responder = [](const HttpRequest&) {
        return HttpResponse{200, R"({"choices":[{"message":{"content":"ok"}}]})"};
    };
    HttpChatBackend backend(transport, {"gpt-test", 0.0, ""});
    TraceEntry entry;
    const Image wide(64, 16, Rgb{1, 2, 3});
    chat(backend, agents::AgentRole::Occlusion, "p", {wide}, RetryPolicy{1, 1, 1.0}, 32, entry,
         no_sleep());
    CHECK(entry.image_scale == doctest::Approx(0.5));
    const auto doc = nlohmann::json::parse(transport->requests[0].body);
    const std::string url =
        doc["messages"][0]["content"][1]["image_url"]["url"].get<std::string>();
    const std::string b64 = url.substr(url.find(',') + 1);
    // decode and check dims shrank
    std::vector<std::uint8_t> bytes;
    {
        auto value_of = [](char c) -> int {
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
    }
    const Image sent = decode_png(bytes);
    CHECK(sent.width() == 32);
    CHECK(sent.height() == 8);
}

TEST_CASE("segmentation client builds multipart requests and validates responses") {
    auto transport = std::make_shared<CapturingTransport>();
    const BinaryMask mask_a(4, 4, true);
    const BinaryMask mask_b(4, 4, false);
    transport->responder = [&](const HttpRequest&) {
        nlohmann::json body = {
            {"masks",
             {base64_encode(encode_mask_png(mask_a)), base64_encode(encode_mask_png(mask_b))}},
            {"scores", {0.9, 0.8}}};
        return HttpResponse{200, body.dump()};
    };
    HttpSegmentationBackend backend(transport);
    TraceEntry entry;
    const Image image(4, 4, Rgb{10, 10, 10});
    const auto result = segment(backend, image, {"cat", "chair"}, RetryPolicy{1, 1, 1.0}, entry,
                                no_sleep());
    REQUIRE(result.masks.size() == 2);
    CHECK(result.masks[0] == mask_a);
    CHECK(result.masks[1] == mask_b);
    CHECK(result.scores == std::vector<double>{0.9, 0.8});

    const std::string golden =
        read_text_file(std::string(AMODAL_GOLDEN_DIR) + "/segment_request.bin");
    CHECK(transport->requests[0].body == golden);
    CHECK(transport->requests[0].content_type ==
          "multipart/form-data; boundary=amodalkit-multipart-boundary");
}

TEST_CASE("segmentation masks with wrong dims are rejected") {
    auto transport = std::make_shared<CapturingTransport>();
    transport->responder = [&](const HttpRequest&) {
        nlohmann::json body = {{"masks", {base64_encode(encode_mask_png(BinaryMask(3, 3)))}}};
        return HttpResponse{200, body.dump()};
    };
    HttpSegmentationBackend backend(transport);
    TraceEntry entry;
    const Image image(4, 4, Rgb{10, 10, 10});
    CHECK_THROWS_WITH_AS(segment(backend, image, {"cat"}, RetryPolicy{1, 1, 1.0}, entry, no_sleep()),
                         doctest::Contains("DimMismatch"), Error);
}

TEST_CASE("inpaint client sends prompt and seed and decodes the PNG reply") {
    auto transport = std::make_shared<CapturingTransport>();
    const Image reply_img(5, 4, Rgb{9, 9, 9});
    transport->responder = [&](const HttpRequest&) {
        const auto png = encode_png(reply_img);
        return HttpResponse{200, std::string(png.begin(), png.end())};
    };
    HttpInpaintBackend backend(transport);
    TraceEntry entry;
    const Image input(5, 4, Rgb{1, 1, 1});
    const BinaryMask mask(5, 4, true);
    const Image out =
        inpaint(backend, input, mask, "a complete cat", 42, RetryPolicy{1, 1, 1.0}, entry, no_sleep());
    CHECK(out == reply_img);
    const std::string& body = transport->requests[0].body;
    CHECK(body.find("name=\"prompt\"\r\n\r\na complete cat") != std::string::npos);
    CHECK(body.find("name=\"seed\"\r\n\r\n42") != std::string::npos);
}

TEST_CASE("inpaint reply with wrong dims is malformed") {
    auto transport = std::make_shared<CapturingTransport>();
    transport->responder = [&](const HttpRequest&) {
        const auto png = encode_png(Image(3, 3, Rgb{0, 0, 0}));
        return HttpResponse{200, std::string(png.begin(), png.end())};
    };
    HttpInpaintBackend backend(transport);
    TraceEntry entry;
    const Image input(5, 4, Rgb{1, 1, 1});
    CHECK_THROWS_WITH_AS(inpaint(backend, input, BinaryMask(5, 4, true), "p", 0,
                                 RetryPolicy{1, 1, 1.0}, entry, no_sleep()),
                         doctest::Contains("MalformedResponse"), Error);
}

TEST_CASE("rate limiter spaces requests at the configured rate") {
    auto now = std::chrono::steady_clock::time_point{};
    std::vector<std::chrono::milliseconds> sleeps;
    RateLimiter limiter(
        2.0, 1.0, [&] { return now; },
        [&](std::chrono::milliseconds d) {
            sleeps.push_back(d);
            now += d;
        });
    limiter.acquire();  // token available immediately
    CHECK(sleeps.empty());
    limiter.acquire();  // must wait ~500ms for the next token
    REQUIRE(sleeps.size() == 1);
    CHECK(sleeps[0].count() >= 500);
    CHECK(sleeps[0].count() <= 510);
    now += std::chrono::seconds(10);
    limiter.acquire();  // bucket refilled meanwhile
    CHECK(sleeps.size() == 1);
}

TEST_CASE("fixture mocks are pure functions of the request") {
    auto fixture = std::make_shared<SceneFixture>(SceneFixture::load(fixture_path("bench.json")));
    FixtureChatBackend chat_mock(fixture);
    const Image observed = fixture->render_observed();
    const std::string a =
        chat_mock.complete(agents::AgentRole::Occlusion, "ignored prompt", {observed});
    const std::string b =
        chat_mock.complete(agents::AgentRole::Occlusion, "ignored prompt", {observed});
    CHECK(a == b);
    CHECK(a.find("potted plant") != std::string::npos);
    CHECK(a.find("dog") != std::string::npos);
}

TEST_CASE("segmentation mock derives visibility from z order") {
    auto fixture = std::make_shared<SceneFixture>(SceneFixture::load(fixture_path("bench.json")));
    FixtureSegmentationBackend seg(fixture);
    const Image observed = fixture->render_observed();
    const auto result = seg.segment(observed, {"park bench", "potted plant"});
    REQUIRE(result.masks.size() == 2);
    CHECK(result.masks[0] == fixture->visible_frame("bench"));
    CHECK(result.masks[1] == fixture->visible_frame("plant"));
    // nothing covers the plant, so its visible mask is its in-frame amodal
    BinaryMask plant_frame(fixture->frame_width, fixture->frame_height);
    for (int y = 0; y < fixture->frame_height; ++y)
        for (int x = 0; x < fixture->frame_width; ++x)
            if (fixture->object("plant").amodal.at(x + fixture->offset_x(),
                                                   y + fixture->offset_y()))
                plant_frame.set(x, y);
    CHECK(result.masks[1] == plant_frame);
}

TEST_CASE("verification mock reports omissions until they are whited out") {
    auto fixture =
        std::make_shared<SceneFixture>(SceneFixture::load(fixture_path("lamp_omission.json")));
    FixtureChatBackend chat_mock(fixture);
    const Image observed = fixture->render_observed();

    const Image no_lamp_whited = white_out(observed, {fixture->visible_frame("chair")});
    const std::string first =
        chat_mock.complete(agents::AgentRole::Verification, "p", {no_lamp_whited});
    CHECK(first.find("floor lamp") != std::string::npos);
    CHECK(first.find("valid") != std::string::npos);

    const Image lamp_whited = white_out(
        observed, {fixture->visible_frame("chair"), fixture->visible_frame("lamp")});
    const std::string second =
        chat_mock.complete(agents::AgentRole::Verification, "p", {lamp_whited});
    CHECK(second.find("floor lamp") == std::string::npos);
    CHECK(second.find("\"candidates\":[]") != std::string::npos);
}

TEST_CASE("embedding mock is a metric at zero on identical images") {
    MseDistanceBackend embed;
    const Image img(6, 6, Rgb{5, 6, 7});
    CHECK(embed.distance(img, img) == 0.0);
    const Image other(6, 6, Rgb{10, 6, 7});
    CHECK(embed.distance(img, other) > 0.0);
}

TEST_CASE("the real transport round-trips against a local server") {
    httplib::Server server;
    int hits = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        if (hits <= 2) {  // two transient failures, then success
            res.status = 503;
            res.set_content("busy", "text/plain");
            return;
        }
        CHECK(req.get_header_value("Authorization") == "Bearer tok");
        const auto doc = nlohmann::json::parse(req.body);
        CHECK(doc["model"] == "local-model");
        res.set_content(R"({"choices":[{"message":{"content":"from server"}}]})",
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    if (port <= 0) {
        MESSAGE("cannot bind a local port in this environment; skipping");
        return;
    }
    std::thread runner([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpChatBackend backend(make_httplib_transport("http://127.0.0.1:" + std::to_string(port), 5),
                            {"local-model", 0.0, "tok"});
    TraceEntry entry;
    const std::string reply = chat(backend, agents::AgentRole::Occlusion, "hello", {two_by_two()},
                                   RetryPolicy{3, 1, 2.0}, 1024, entry, no_sleep());
    CHECK(reply == "from server");
    CHECK(entry.attempts == 3);
    CHECK(hits == 3);
    server.stop();
    runner.join();
}

TEST_CASE("mock_from_fixture wires every role") {
    auto fixture = std::make_shared<SceneFixture>(SceneFixture::load(fixture_path("ball.json")));
    const BackendSet set = mock_from_fixture(fixture);
    CHECK_NOTHROW(set.chat_for(agents::AgentRole::Occlusion));
    CHECK_NOTHROW(set.chat_for(agents::AgentRole::Verification));
    CHECK_NOTHROW(set.chat_for(agents::AgentRole::JudgeConsistency));
    CHECK_NOTHROW(set.segmentation_backend());
    CHECK_NOTHROW(set.inpaint_backend());
}
