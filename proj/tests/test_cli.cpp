// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "amodal/mac_eval.hpp"
#include "amodal/mask_ops.hpp"
#include "amodal/png_io.hpp"
#include "amodal/scene_fixture.hpp"
#include "amodal/util.hpp"
#include "test_support.hpp"

using namespace amodal;
using testsupport::fixture_path;

namespace {

namespace fs = std::filesystem;

struct ToolResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

ToolResult run_tool(const std::string& args) {
    const std::string command = std::string(AMODAL_TOOL_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    ToolResult result;
    char buffer[512];
    while (std::fgets(buffer, sizeof(buffer), pipe)) result.output += buffer;
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string temp_dir(const std::string& leaf) {
    const std::string dir = (fs::temp_directory_path() / leaf).string();
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json plan_json_without_trace(const std::string& path) {
    auto doc = nlohmann::json::parse(read_text_file(path));
    doc.erase("trace");
    return doc;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_tool("").exit_code == 2);
    CHECK(run_tool("complete --mock-fixture " + fixture_path("bench.json")).exit_code == 2);
    CHECK(run_tool("bogus-subcommand").exit_code == 2);
}

TEST_CASE("unknown config keys are rejected with exit 2") {
    const std::string dir = temp_dir("amodal_cli_badcfg");
    write_text_file(dir + "/cfg.json", R"({"pipeline": {"k": 3, "typo_key": 1}})");
    const auto result = run_tool("--config " + dir + "/cfg.json complete --query x --image y.png");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("typo_key") != std::string::npos);
}

TEST_CASE("complete on the bench fixture reproduces the ground-truth composite") {
    const std::string dir = temp_dir("amodal_cli_bench");
    const auto result = run_tool("complete --mock-fixture " + fixture_path("bench.json") +
                                 " --query \"park bench\" --out " + dir + "/out");
    CHECK(result.exit_code == 0);
    const SceneFixture fx = SceneFixture::load(fixture_path("bench.json"));
    const Image completed = read_png(dir + "/out/completed.png");
    CHECK(completed == fx.render_expected_completion(0, 0));
    CHECK(fs::exists(dir + "/out/plan/mask.png"));
    CHECK(fs::exists(dir + "/out/plan/input.png"));
    CHECK(fs::exists(dir + "/out/plan/visible.png"));
    CHECK(fs::exists(dir + "/out/trace.json"));
}

TEST_CASE("all-hypotheses emits one output per hypothesis with the weight in the name") {
    const std::string dir = temp_dir("amodal_cli_horse");
    const auto result = run_tool("complete --mock-fixture " + fixture_path("horse.json") +
                                 " --query \"brown horse\" --all-hypotheses --out " + dir + "/out");
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(dir + "/out/completed_00_w0.450.png"));
    CHECK(fs::exists(dir + "/out/completed_01_w0.350.png"));
    CHECK(fs::exists(dir + "/out/completed_02_w0.200.png"));
    const Image first = read_png(dir + "/out/completed_00_w0.450.png");
    const Image second = read_png(dir + "/out/completed_01_w0.350.png");
    CHECK_FALSE(first == second);
}

TEST_CASE("complete is byte-deterministic across runs") {
    const std::string dir = temp_dir("amodal_cli_determinism");
    for (const char* out : {"a", "b"}) {
        const auto result = run_tool("complete --mock-fixture " + fixture_path("crowd.json") +
                                     " --query \"blue suitcase\" --out " + dir + "/" + out);
        CHECK(result.exit_code == 0);
    }
    for (const char* file : {"completed.png", "plan/mask.png", "plan/input.png", "plan/visible.png"}) {
        CAPTURE(file);
        CHECK(read_binary_file(dir + "/a/" + file) == read_binary_file(dir + "/b/" + file));
    }
    // plan.json carries wall-clock timings inside the trace; everything else
    // must match exactly
    CHECK(plan_json_without_trace(dir + "/a/plan/plan.json") ==
          plan_json_without_trace(dir + "/b/plan/plan.json"));
}

TEST_CASE("batch manifests complete every record and exit 0") {
    const std::string dir = temp_dir("amodal_cli_batch");
    std::string manifest;
    manifest += fixture_path("ball.json") + "\tred ball\t" + dir + "/ball\n";
    manifest += fixture_path("taxi.json") + "\tyellow taxi\t" + dir + "/taxi\n";
    write_text_file(dir + "/batch.tsv", manifest);
    const auto result =
        run_tool("complete --batch " + dir + "/batch.tsv --mock --parallel 2");
    CHECK(result.exit_code == 0);
    CHECK(fs::exists(dir + "/ball/completed.png"));
    CHECK(fs::exists(dir + "/taxi/completed.png"));
}

TEST_CASE("evaluate writes a report and matches the committed golden") {
    const std::string dir = temp_dir("amodal_cli_eval");
    // materialize deterministic inputs from the fixture pack
    const SceneFixture lamp = SceneFixture::load(fixture_path("lamp_omission.json"));
    const Image observed = lamp.render_observed();
    write_png(dir + "/original.png", observed);
    write_png(dir + "/gt.png", lamp.render_expected_completion(0, 0));
    const auto composed = compose_input(observed, lamp.visible_frame(lamp.target_id), {}, kWhite);
    write_png(dir + "/visible_only.png", composed.composite);
    write_mask_png(dir + "/gt_mask.png", lamp.target().amodal);

    std::string manifest;
    manifest += R"({"method": "ours", "sample_id": "s0", "original": ")" + dir +
                R"(/original.png", "completed": ")" + dir +
                R"(/gt.png", "target": "gray cat", "gt_mask": ")" + dir + R"(/gt_mask.png"})" + "\n";
    manifest += R"({"method": "null", "sample_id": "s0", "original": ")" + dir +
                R"(/original.png", "completed": ")" + dir +
                R"(/visible_only.png", "target": "gray cat", "gt_mask": ")" + dir +
                R"(/gt_mask.png"})" + "\n";
    write_text_file(dir + "/manifest.jsonl", manifest);

    const std::string judge = "fixture:" + fixture_path("lamp_omission.json");
    const auto result = run_tool("evaluate --manifest " + dir + "/manifest.jsonl --judge \"" +
                                 judge + "\" --parallel 2 --out " + dir + "/report.json");
    CHECK(result.exit_code == 0);

    const auto report = eval::report_from_json(read_text_file(dir + "/report.json"));
    CHECK(*report.aggregates.at("ours").mac_completeness_rate == doctest::Approx(100.0));
    CHECK(*report.aggregates.at("null").mac_completeness_rate == doctest::Approx(0.0));
    CHECK(*report.aggregates.at("ours").gt_miou_mean == doctest::Approx(1.0));

    // golden regression: the report is byte-identical to the committed file
    const std::string golden =
        read_text_file(std::string(AMODAL_GOLDEN_DIR) + "/eval_report.json");
    CHECK(read_text_file(dir + "/report.json") == golden);

    // and byte-identical across repeated invocations
    const auto again = run_tool("evaluate --manifest " + dir + "/manifest.jsonl --judge \"" +
                                judge + "\" --out " + dir + "/report2.json");
    CHECK(again.exit_code == 0);
    CHECK(read_text_file(dir + "/report2.json") == read_text_file(dir + "/report.json"));
}

TEST_CASE("evaluate exits 3 when more than 10 percent of records are skipped") {
    const std::string dir = temp_dir("amodal_cli_eval_skip");
    const SceneFixture ball = SceneFixture::load(fixture_path("ball.json"));
    write_png(dir + "/original.png", ball.render_observed());
    write_png(dir + "/gt.png", ball.render_expected_completion(0, 0));
    std::string manifest;
    manifest += R"({"method": "m", "sample_id": "s0", "original": ")" + dir +
                R"(/original.png", "completed": ")" + dir + R"(/gt.png", "target": "red ball"})" +
                "\n";
    manifest += R"({"method": "m", "sample_id": "s1", "original": ")" + dir +
                R"(/missing.png", "completed": ")" + dir + R"(/gt.png", "target": "red ball"})" +
                "\n";
    write_text_file(dir + "/manifest.jsonl", manifest);
    const auto result = run_tool("evaluate --manifest " + dir + "/manifest.jsonl --judge digest" +
                                 " --out " + dir + "/report.json");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("skipped") != std::string::npos);
}

TEST_CASE("correlate joins a report with mirrored ratings at rho 1") {
    const std::string dir = temp_dir("amodal_cli_correlate");
    // hand-built report with known consistency totals
    eval::EvalReport report;
    report.judge_model = "test";
    for (int i = 0; i < 8; ++i) {
        eval::RecordResult r;
        r.record.method = "ours";
        r.record.sample_id = "s" + std::to_string(i);
        r.record.target = "t";
        r.complete = i % 2 == 0;
        agents::ConsistencyVerdict v;
        v.total = 2 + i;
        r.consistency = v;
        report.records.push_back(std::move(r));
    }
    write_text_file(dir + "/report.json", eval::report_to_json(report));

    std::string csv = "sample_id,method,rater_id,completeness,consistency,preference\n";
    for (int i = 0; i < 8; ++i)
        csv += "s" + std::to_string(i) + ",ours,r0," + std::to_string(i % 2) + "," +
               format_fixed(1.0 + 0.9 * (2 + i), 2) + ",1\n";
    write_text_file(dir + "/ratings.csv", csv);

    const auto result = run_tool("correlate --report " + dir + "/report.json --ratings " + dir +
                                 "/ratings.csv --out " + dir + "/matrix.json");
    CHECK(result.exit_code == 0);
    const auto matrix = nlohmann::json::parse(read_text_file(dir + "/matrix.json"));
    bool found = false;
    for (const auto& cell : matrix["cells"]) {
        if (cell["predictor"] == "mac_consistency" && cell["target"] == "human_consistency") {
            found = true;
            CHECK(cell["value"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
    CHECK(found);
}

TEST_CASE("correlate with disjoint ids exits 3 with NoOverlap") {
    const std::string dir = temp_dir("amodal_cli_nooverlap");
    eval::EvalReport report;
    for (int i = 0; i < 3; ++i) {
        eval::RecordResult r;
        r.record.method = "ours";
        r.record.sample_id = "s" + std::to_string(i);
        r.complete = true;
        report.records.push_back(std::move(r));
    }
    write_text_file(dir + "/report.json", eval::report_to_json(report));
    write_text_file(dir + "/ratings.csv",
                    "sample_id,method,rater_id,completeness,consistency,preference\n"
                    "zz,ours,r0,1,5.0,1\n");
    const auto result = run_tool("correlate --report " + dir + "/report.json --ratings " + dir +
                                 "/ratings.csv");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("NoOverlap") != std::string::npos);
}

TEST_CASE("diversity of a single or duplicated file is zero") {
    const std::string dir = temp_dir("amodal_cli_diversity");
    const SceneFixture ball = SceneFixture::load(fixture_path("ball.json"));
    fs::create_directories(dir + "/one");
    write_png(dir + "/one/a.png", ball.render_observed());
    auto result = run_tool("diversity --dir " + dir + "/one --distance mse");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"mean_pairwise\": 0.0") != std::string::npos);

    fs::create_directories(dir + "/five");
    for (int i = 0; i < 5; ++i)
        write_png(dir + "/five/copy" + std::to_string(i) + ".png", ball.render_observed());
    result = run_tool("diversity --dir " + dir + "/five --distance mse");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"mean_pairwise\": 0.0") != std::string::npos);
}

TEST_CASE("unreachable backends exit with code 4") {
    const std::string dir = temp_dir("amodal_cli_backend");
    write_text_file(dir + "/cfg.json", R"({
      "pipeline": {"retry": {"max_attempts": 1, "backoff_ms": 1}},
      "backends": {
        "reasoning": {"url": "http://127.0.0.1:9", "model": "test-model"},
        "segmentation": {"url": "http://127.0.0.1:9"},
        "inpaint": {"url": "http://127.0.0.1:9"}
      }
    })");
    const SceneFixture ball = SceneFixture::load(fixture_path("ball.json"));
    write_png(dir + "/obs.png", ball.render_observed());
    const auto result = run_tool("--config " + dir + "/cfg.json complete --image " + dir +
                                 "/obs.png --query \"red ball\" --out " + dir + "/out");
    CHECK(result.exit_code == 4);
    CHECK(result.output.find("BackendUnavailable") != std::string::npos);
}
