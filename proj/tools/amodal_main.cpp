// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0
//
// amodal: training-free amodal-completion engine and evaluation harness.
// Subcommands: complete, evaluate, correlate, diversity.
// Exit codes: 0 success, 2 usage/config, 3 data error, 4 backend error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <thread>

#include <json.hpp>

#include "amodal/http_backends.hpp"
#include "amodal/mac_eval.hpp"
#include "amodal/mock_backends.hpp"
#include "amodal/orchestrator.hpp"
#include "amodal/plan_io.hpp"
#include "amodal/png_io.hpp"
#include "amodal/scene_fixture.hpp"
#include "amodal/stats.hpp"
#include "amodal/util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace amodal;
using nlohmann::json;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::BadConfig:
        case ErrorKind::BadArgument:
        case ErrorKind::IncompleteContext:
            return 2;
        case ErrorKind::BackendUnavailable:
        case ErrorKind::BackendRejected:
        case ErrorKind::SynthesisFailed:
            return 4;
        default:
            return 3;
    }
}

void print_error_record(const Error& e) {
    const json record = {{"error", to_string(e.kind())}, {"message", e.what()}};
    std::cerr << record.dump() << "\n";
}

// ---- configuration ----

struct BackendEndpoint {
    std::string url;
    std::string model;
    std::string token_env;
    double temperature = 0.0;
};

struct CliConfig {
    PipelineConfig pipeline;
    double rate_limit_per_s = 2.0;
    int timeout_s = 60;
    BackendEndpoint reasoning;     // occlusion, boundary, hypothesis agents
    BackendEndpoint verification;  // defaults to reasoning when unset
    BackendEndpoint judge;
    std::string segmentation_url;
    std::string inpaint_url;
    std::string embedding_url;
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw Error(ErrorKind::BadConfig, "unknown config key '" + key + "' in " + where);
}

BackendEndpoint parse_endpoint(const json& obj, const std::string& where) {
    check_keys(obj, {"url", "model", "token_env", "temperature"}, where);
    BackendEndpoint out;
    out.url = obj.value("url", "");
    out.model = obj.value("model", "");
    out.token_env = obj.value("token_env", "");
    out.temperature = obj.value("temperature", 0.0);
    return out;
}

CliConfig load_config_file(const std::string& path) {
    CliConfig cfg;
    if (path.empty()) return cfg;
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadConfig, std::string("config parse: ") + e.what());
    }
    check_keys(doc, {"pipeline", "backends"}, "config root");
    if (doc.contains("pipeline")) {
        const json& p = doc["pipeline"];
        check_keys(p,
                   {"k", "max_verification_rounds", "expansion_ceiling", "dilation", "background",
                    "max_image_side", "seed", "retry", "rate_limit_per_s", "timeout_s"},
                   "pipeline");
        cfg.pipeline.hypothesis_count = p.value("k", cfg.pipeline.hypothesis_count);
        cfg.pipeline.max_verification_rounds =
            p.value("max_verification_rounds", cfg.pipeline.max_verification_rounds);
        cfg.pipeline.expansion_ceiling = p.value("expansion_ceiling", cfg.pipeline.expansion_ceiling);
        cfg.pipeline.max_image_side = p.value("max_image_side", cfg.pipeline.max_image_side);
        cfg.pipeline.synthesis_seed = p.value("seed", cfg.pipeline.synthesis_seed);
        cfg.rate_limit_per_s = p.value("rate_limit_per_s", cfg.rate_limit_per_s);
        cfg.timeout_s = p.value("timeout_s", cfg.timeout_s);
        if (p.contains("dilation")) {
            const json& d = p["dilation"];
            check_keys(d, {"shape", "min_radius", "diag_fraction", "fixed_radius"}, "dilation");
            const std::string shape = d.value("shape", "disk");
            if (shape == "disk") cfg.pipeline.dilation.shape = StructuringElement::Shape::Disk;
            else if (shape == "square")
                cfg.pipeline.dilation.shape = StructuringElement::Shape::Square;
            else throw Error(ErrorKind::BadConfig, "dilation shape must be disk|square");
            cfg.pipeline.dilation.min_radius = d.value("min_radius", 2);
            cfg.pipeline.dilation.bbox_diag_fraction = d.value("diag_fraction", 0.015);
            if (d.contains("fixed_radius") && !d["fixed_radius"].is_null())
                cfg.pipeline.dilation.fixed_radius = d["fixed_radius"].get<int>();
        }
        if (p.contains("background")) {
            const auto bg = p["background"].get<std::vector<int>>();
            if (bg.size() != 3) throw Error(ErrorKind::BadConfig, "background must be [r,g,b]");
            cfg.pipeline.background = {static_cast<std::uint8_t>(bg[0]),
                                       static_cast<std::uint8_t>(bg[1]),
                                       static_cast<std::uint8_t>(bg[2])};
        }
        if (p.contains("retry")) {
            const json& r = p["retry"];
            check_keys(r, {"max_attempts", "backoff_ms", "multiplier"}, "retry");
            cfg.pipeline.retry.max_attempts = r.value("max_attempts", 3);
            cfg.pipeline.retry.backoff_ms = r.value("backoff_ms", 200);
            cfg.pipeline.retry.multiplier = r.value("multiplier", 2.0);
        }
    }
    if (doc.contains("backends")) {
        const json& b = doc["backends"];
        check_keys(b, {"reasoning", "verification", "judge", "segmentation", "inpaint", "embedding"},
                   "backends");
        if (b.contains("reasoning")) cfg.reasoning = parse_endpoint(b["reasoning"], "reasoning");
        if (b.contains("verification"))
            cfg.verification = parse_endpoint(b["verification"], "verification");
        if (b.contains("judge")) cfg.judge = parse_endpoint(b["judge"], "judge");
        if (b.contains("segmentation")) {
            check_keys(b["segmentation"], {"url"}, "segmentation");
            cfg.segmentation_url = b["segmentation"].value("url", "");
        }
        if (b.contains("inpaint")) {
            check_keys(b["inpaint"], {"url"}, "inpaint");
            cfg.inpaint_url = b["inpaint"].value("url", "");
        }
        if (b.contains("embedding")) {
            check_keys(b["embedding"], {"url"}, "embedding");
            cfg.embedding_url = b["embedding"].value("url", "");
        }
    }
    return cfg;
}

void apply_env(CliConfig& cfg) {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    if (auto v = env("AMODAL_REASONING_URL")) cfg.reasoning.url = *v;
    if (auto v = env("AMODAL_REASONING_MODEL")) cfg.reasoning.model = *v;
    if (auto v = env("AMODAL_VERIFICATION_URL")) cfg.verification.url = *v;
    if (auto v = env("AMODAL_VERIFICATION_MODEL")) cfg.verification.model = *v;
    if (auto v = env("AMODAL_JUDGE_URL")) cfg.judge.url = *v;
    if (auto v = env("AMODAL_JUDGE_MODEL")) cfg.judge.model = *v;
    if (auto v = env("AMODAL_SEGMENT_URL")) cfg.segmentation_url = *v;
    if (auto v = env("AMODAL_INPAINT_URL")) cfg.inpaint_url = *v;
    if (auto v = env("AMODAL_EMBED_URL")) cfg.embedding_url = *v;
    if (auto v = env("AMODAL_SEED")) cfg.pipeline.synthesis_seed = std::stoull(*v);
    if (auto v = env("AMODAL_K")) cfg.pipeline.hypothesis_count = std::stoi(*v);
}

std::string token_for(const BackendEndpoint& endpoint) {
    if (const char* direct = std::getenv("AMODAL_CHAT_TOKEN"); direct && *direct) return direct;
    if (!endpoint.token_env.empty())
        if (const char* v = std::getenv(endpoint.token_env.c_str()); v && *v) return v;
    return "";
}

std::shared_ptr<svc::ChatBackend> make_chat(const CliConfig& cfg, const BackendEndpoint& endpoint,
                                            double temperature_override) {
    if (endpoint.url.empty())
        throw Error(ErrorKind::BadConfig, "no chat backend URL configured (see --config)");
    if (endpoint.model.empty())
        throw Error(ErrorKind::BadConfig, "no chat model configured for " + endpoint.url);
    auto limiter = std::make_shared<svc::RateLimiter>(cfg.rate_limit_per_s);
    return std::make_shared<svc::HttpChatBackend>(
        svc::make_httplib_transport(endpoint.url, cfg.timeout_s),
        svc::ChatEndpointConfig{endpoint.model, temperature_override, token_for(endpoint)},
        limiter);
}

svc::BackendSet make_http_backends(const CliConfig& cfg) {
    using agents::AgentRole;
    svc::BackendSet set;
    const BackendEndpoint& verification =
        cfg.verification.url.empty() ? cfg.reasoning : cfg.verification;
    auto reasoning = make_chat(cfg, cfg.reasoning, cfg.reasoning.temperature);
    auto verifier = make_chat(cfg, verification, verification.temperature);
    set.chat[AgentRole::Occlusion] = reasoning;
    set.chat[AgentRole::Boundary] = reasoning;
    set.chat[AgentRole::Hypothesis] = reasoning;
    set.chat[AgentRole::Verification] = verifier;
    if (!cfg.judge.url.empty()) {
        if (cfg.judge.temperature != 0.0)
            throw Error(ErrorKind::BadConfig, "judge backends must use temperature 0");
        auto judge = make_chat(cfg, cfg.judge, 0.0);
        set.chat[AgentRole::JudgeCompleteness] = judge;
        set.chat[AgentRole::JudgeConsistency] = judge;
    }
    if (cfg.segmentation_url.empty())
        throw Error(ErrorKind::BadConfig, "no segmentation backend URL configured");
    if (cfg.inpaint_url.empty())
        throw Error(ErrorKind::BadConfig, "no inpaint backend URL configured");
    set.segmentation = std::make_shared<svc::HttpSegmentationBackend>(
        svc::make_httplib_transport(cfg.segmentation_url, cfg.timeout_s),
        std::make_shared<svc::RateLimiter>(cfg.rate_limit_per_s));
    set.inpaint = std::make_shared<svc::HttpInpaintBackend>(
        svc::make_httplib_transport(cfg.inpaint_url, cfg.timeout_s),
        std::make_shared<svc::RateLimiter>(cfg.rate_limit_per_s));
    if (!cfg.embedding_url.empty())
        set.embedding = std::make_shared<svc::HttpEmbeddingBackend>(
            svc::make_httplib_transport(cfg.embedding_url, cfg.timeout_s),
            std::make_shared<svc::RateLimiter>(cfg.rate_limit_per_s));
    return set;
}

// ---- complete ----

struct CompleteArgs {
    std::string image;
    std::string query;
    std::string out = "out";
    std::string mock_fixture;
    std::string batch;
    bool batch_mock = false;
    bool all_hypotheses = false;
    bool ablate_boundary = false;
    bool ablate_verification = false;
    bool deterministic_desc = false;
    std::optional<int> k;
    std::optional<int> rounds;
    std::optional<std::uint64_t> seed;
    int parallel = 1;
};

void write_pipeline_outputs(const std::string& out_dir, const PipelineResult& result,
                            bool all_hypotheses) {
    fs::create_directories(out_dir);
    if (all_hypotheses) {
        for (std::size_t i = 0; i < result.outputs.size(); ++i) {
            const auto& output = result.outputs[i];
            char stem[64];
            std::snprintf(stem, sizeof(stem), "completed_%02zu_w%s", i,
                          format_fixed(output.weight, 3).c_str());
            write_png(out_dir + "/" + stem + ".png", output.image);
            char plan_dir[64];
            std::snprintf(plan_dir, sizeof(plan_dir), "plan_%02zu", i);
            write_plan_dir(out_dir + "/" + plan_dir, output.plan);
        }
    } else {
        write_png(out_dir + "/completed.png", result.outputs.at(0).image);
        write_plan_dir(out_dir + "/plan", result.outputs.at(0).plan);
    }
    write_text_file(out_dir + "/trace.json", trace_to_json(result.trace) + "\n");
}

PipelineConfig pipeline_config_for(const CliConfig& cli_cfg, const CompleteArgs& args) {
    PipelineConfig cfg = cli_cfg.pipeline;
    if (args.k) cfg.hypothesis_count = *args.k;
    if (args.rounds) cfg.max_verification_rounds = *args.rounds;
    if (args.seed) cfg.synthesis_seed = *args.seed;
    cfg.ablation.boundary_agent = !args.ablate_boundary;
    cfg.ablation.verification_agent = !args.ablate_verification;
    cfg.ablation.hypothesis_diversity = !args.deterministic_desc;
    cfg.enumerate_all_hypotheses = args.all_hypotheses;
    cfg.validate();
    return cfg;
}

// `shared` carries the HTTP backend set in non-mock mode so concurrent batch
// records share one rate limiter per endpoint.
int run_complete_one(const CliConfig& cli_cfg, const CompleteArgs& args,
                     const std::string& image_or_fixture, const std::string& query,
                     const std::string& out_dir, bool mock, const svc::BackendSet* shared) {
    const PipelineConfig cfg = pipeline_config_for(cli_cfg, args);

    svc::BackendSet backends;
    Image observed;
    if (mock) {
        auto fixture = std::make_shared<SceneFixture>(SceneFixture::load(image_or_fixture));
        backends = svc::mock_from_fixture(fixture);
        observed = fixture->render_observed();
    } else {
        backends = shared ? *shared : make_http_backends(cli_cfg);
        observed = read_png(image_or_fixture);
    }

    try {
        const PipelineResult result = run_pipeline(observed, {query, query}, backends, cfg);
        write_pipeline_outputs(out_dir, result, args.all_hypotheses);
    } catch (const SynthesisError& e) {
        // keep the finished plan around for offline retry
        fs::create_directories(out_dir);
        write_plan_dir(out_dir + "/plan_failed", e.plan());
        throw;
    }
    return 0;
}

int cmd_complete(const CliConfig& cli_cfg, const CompleteArgs& args) {
    if (!args.batch.empty()) {
        struct BatchRecord {
            std::string source, query, out;
        };
        std::vector<BatchRecord> records;
        std::istringstream stream(read_text_file(args.batch));
        std::string line;
        while (std::getline(stream, line)) {
            if (line.empty()) continue;
            const auto parts = split(line, '\t');
            if (parts.size() != 3)
                throw Error(ErrorKind::SchemaViolation,
                            "batch lines must be <image>\\t<query>\\t<outdir>");
            records.push_back({parts[0], parts[1], parts[2]});
        }
        svc::BackendSet shared;
        if (!args.batch_mock) shared = make_http_backends(cli_cfg);
        std::vector<std::optional<Error>> failures(records.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
                try {
                    run_complete_one(cli_cfg, args, records[i].source, records[i].query,
                                     records[i].out, args.batch_mock,
                                     args.batch_mock ? nullptr : &shared);
                } catch (const Error& e) {
                    failures[i] = e;
                }
            }
        };
        const int workers = std::max(1, std::min<int>(args.parallel, records.size()));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        int exit_code = 0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (failures[i]) {
                std::cerr << records[i].source << ": " << failures[i]->what() << "\n";
                exit_code = std::max(exit_code, exit_code_for(*failures[i]));
            } else {
                std::cout << records[i].source << ": ok -> " << records[i].out << "\n";
            }
        }
        return exit_code;
    }

    if (args.query.empty())
        throw Error(ErrorKind::BadArgument, "complete requires --query");
    const bool mock = !args.mock_fixture.empty();
    if (!mock && args.image.empty())
        throw Error(ErrorKind::BadArgument, "complete requires --image (or --mock-fixture)");
    return run_complete_one(cli_cfg, args, mock ? args.mock_fixture : args.image, args.query,
                            args.out, mock, nullptr);
}

// ---- evaluate ----

struct EvaluateArgs {
    std::string manifest;
    std::string out = "report.json";
    std::string judge = "config";  // config | digest | fixture:<path>
    std::string embedding = "none";  // none | mse | http
    bool no_pixel_metrics = false;
    int parallel = 1;
};

int cmd_evaluate(const CliConfig& cli_cfg, const EvaluateArgs& args) {
    const auto records = eval::load_manifest(args.manifest);
    std::shared_ptr<svc::ChatBackend> judge;
    if (args.judge == "config") {
        if (cli_cfg.judge.temperature != 0.0)
            throw Error(ErrorKind::BadConfig, "judge backends must use temperature 0");
        judge = make_chat(cli_cfg, cli_cfg.judge, 0.0);
    } else if (args.judge == "digest") {
        judge = std::make_shared<svc::DigestJudgeBackend>();
    } else if (args.judge.rfind("fixture:", 0) == 0) {
        auto fixture =
            std::make_shared<SceneFixture>(SceneFixture::load(args.judge.substr(8)));
        judge = std::make_shared<svc::FixtureChatBackend>(fixture);
    } else {
        throw Error(ErrorKind::BadConfig, "--judge must be config, digest, or fixture:<path>");
    }

    eval::MetricConfig metrics;
    metrics.pixel_metrics = !args.no_pixel_metrics;
    if (args.embedding == "mse") metrics.embedding = std::make_shared<svc::MseDistanceBackend>();
    else if (args.embedding == "http") {
        if (cli_cfg.embedding_url.empty())
            throw Error(ErrorKind::BadConfig, "no embedding backend URL configured");
        metrics.embedding = std::make_shared<svc::HttpEmbeddingBackend>(
            svc::make_httplib_transport(cli_cfg.embedding_url, cli_cfg.timeout_s));
    } else if (args.embedding != "none") {
        throw Error(ErrorKind::BadConfig, "--embedding must be none, mse, or http");
    }

    const eval::EvalReport report =
        eval::evaluate_dataset(records, *judge, metrics, cli_cfg.pipeline.retry, args.parallel);
    write_text_file(args.out, eval::report_to_json(report));
    std::cout << eval::render_report_table(report);
    if (report.skip_fraction() > 0.10) {
        print_error_record(Error(ErrorKind::IoError,
                                 "more than 10% of records were skipped (" +
                                     std::to_string(report.skip_count()) + "/" +
                                     std::to_string(report.records.size()) + ")"));
        return 3;
    }
    return 0;
}

// ---- correlate ----

struct CorrelateArgs {
    std::string report;
    std::string ratings;
    std::string out = "correlation.json";
    std::string scope = "pooled";
};

int cmd_correlate(const CorrelateArgs& args) {
    const eval::EvalReport report = eval::report_from_json(read_text_file(args.report));
    stats::CorrelationMatrix matrix;
    if (args.ratings.empty()) {
        matrix = stats::correlate_metrics(report);
    } else {
        const auto table = stats::RatingTable::load_csv(args.ratings);
        const auto scope = args.scope == "within-method" ? stats::CorrelationScope::WithinMethod
                                                         : stats::CorrelationScope::Pooled;
        matrix = stats::correlate_metrics(report, table, scope);
    }
    write_text_file(args.out, matrix.to_json());
    std::cout << matrix.render_table();
    return 0;
}

// ---- diversity ----

struct DiversityArgs {
    std::string dir;
    std::string distance = "ssim";  // ssim | mse | http
    std::string out;
};

int cmd_diversity(const CliConfig& cli_cfg, const DiversityArgs& args) {
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(args.dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw Error(ErrorKind::IoError, "no .png files in " + args.dir);
    std::vector<Image> images;
    for (const auto& path : paths) images.push_back(read_png(path));

    stats::ImageDistance distance;
    if (args.distance == "ssim") distance = stats::ssim_complement_distance;
    else if (args.distance == "mse") {
        auto backend = std::make_shared<svc::MseDistanceBackend>();
        distance = [backend](const Image& a, const Image& b) { return backend->distance(a, b); };
    } else if (args.distance == "http") {
        if (cli_cfg.embedding_url.empty())
            throw Error(ErrorKind::BadConfig, "no embedding backend URL configured");
        auto backend = std::make_shared<svc::HttpEmbeddingBackend>(
            svc::make_httplib_transport(cli_cfg.embedding_url, cli_cfg.timeout_s));
        distance = [backend](const Image& a, const Image& b) { return backend->distance(a, b); };
    } else {
        throw Error(ErrorKind::BadConfig, "--distance must be ssim, mse, or http");
    }

    const double value = stats::pairwise_diversity(images, distance);
    const json doc = {{"images", paths.size()}, {"distance", args.distance}, {"mean_pairwise", value}};
    std::cout << doc.dump(2) << "\n";
    if (!args.out.empty()) write_text_file(args.out, doc.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"amodal completion engine and MAC evaluation harness"};
    app.require_subcommand(1);
    std::string config_path;
    if (const char* env_config = std::getenv("AMODAL_CONFIG"); env_config && *env_config)
        config_path = env_config;
    app.add_option("--config", config_path, "JSON config file (see README)");

    CompleteArgs complete_args;
    auto* complete = app.add_subcommand("complete", "run the completion pipeline on one image");
    complete->add_option("--image", complete_args.image, "observed image (PNG)");
    complete->add_option("--query", complete_args.query, "target object phrase");
    complete->add_option("--out", complete_args.out, "output directory");
    complete->add_option("--mock-fixture", complete_args.mock_fixture,
                         "scene fixture JSON; swaps in deterministic mock backends");
    complete->add_option("--batch", complete_args.batch,
                         "batch manifest: <image>\\t<query>\\t<outdir> per line");
    complete->add_flag("--mock", complete_args.batch_mock,
                       "batch mode: treat the first column as fixture paths");
    complete->add_flag("--all-hypotheses", complete_args.all_hypotheses,
                       "emit one completion per hypothesis, weight in the filename");
    complete->add_flag("--ablate-boundary", complete_args.ablate_boundary,
                       "disable the boundary agent (no canvas expansion)");
    complete->add_flag("--ablate-verification", complete_args.ablate_verification,
                       "disable the verification agent (no residual sweep)");
    complete->add_flag("--deterministic-desc", complete_args.deterministic_desc,
                       "single deterministic description instead of diverse hypotheses");
    int k_opt = 0, rounds_opt = -1;
    std::uint64_t seed_opt = 0;
    auto* k_option = complete->add_option("--k", k_opt, "hypothesis count");
    auto* rounds_option = complete->add_option("--rounds", rounds_opt, "verification round cap");
    auto* seed_option = complete->add_option("--seed", seed_opt, "synthesis seed");
    complete->add_option("--parallel", complete_args.parallel, "batch parallelism");

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "MAC-score a manifest of completions");
    evaluate->add_option("--manifest", evaluate_args.manifest, "JSON-lines manifest")->required();
    evaluate->add_option("--out", evaluate_args.out, "report JSON path");
    evaluate->add_option("--judge", evaluate_args.judge, "config | digest | fixture:<path>");
    evaluate->add_option("--embedding", evaluate_args.embedding, "none | mse | http");
    evaluate->add_flag("--no-pixel-metrics", evaluate_args.no_pixel_metrics,
                       "skip native SSIM/PSNR/mIoU");
    evaluate->add_option("--parallel", evaluate_args.parallel, "records evaluated concurrently");

    CorrelateArgs correlate_args;
    auto* correlate = app.add_subcommand("correlate", "correlate a report with ratings or GT");
    correlate->add_option("--report", correlate_args.report, "evaluation report JSON")->required();
    correlate->add_option("--ratings", correlate_args.ratings,
                          "user-study CSV; omit to correlate against GT metrics");
    correlate->add_option("--scope", correlate_args.scope, "pooled | within-method");
    correlate->add_option("--out", correlate_args.out, "matrix JSON path");

    DiversityArgs diversity_args;
    auto* diversity = app.add_subcommand("diversity", "mean pairwise distance over a directory");
    diversity->add_option("--dir", diversity_args.dir, "directory of PNG images")->required();
    diversity->add_option("--distance", diversity_args.distance, "ssim | mse | http");
    diversity->add_option("--out", diversity_args.out, "optional JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        CliConfig cfg = load_config_file(config_path);
        apply_env(cfg);
        if (k_option->count()) complete_args.k = k_opt;
        if (rounds_option->count()) complete_args.rounds = rounds_opt;
        if (seed_option->count()) complete_args.seed = seed_opt;

        if (complete->parsed()) return cmd_complete(cfg, complete_args);
        if (evaluate->parsed()) return cmd_evaluate(cfg, evaluate_args);
        if (correlate->parsed()) return cmd_correlate(correlate_args);
        if (diversity->parsed()) return cmd_diversity(cfg, diversity_args);
    } catch (const Error& e) {
        print_error_record(e);
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
