// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/mac_eval.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "amodal/mask_ops.hpp"
#include "amodal/metrics.hpp"
#include "amodal/png_io.hpp"
#include "amodal/service.hpp"
#include "amodal/util.hpp"

namespace amodal::eval {

namespace {

using agents::AgentRole;
using nlohmann::ordered_json;

void require_deterministic_judge(const svc::ChatBackend& judge) {
    if (judge.temperature() != 0.0)
        throw Error(ErrorKind::BadConfig, "judge backends must run with temperature 0");
}

template <typename T>
T judge_call(AgentRole role, const Image& original, const Image& completed,
             const std::string& target, svc::ChatBackend& judge, const RetryPolicy& retry,
             T (*parse)(const std::string&)) {
    require_deterministic_judge(judge);
    const auto prompt = agents::render_judge_prompt(role, {original, completed, target});
    auto send = [&](const std::string& text) {
        TraceEntry entry;
        entry.stage = "judge";
        return svc::chat(judge, role, text, prompt.images, retry, 1024, entry);
    };
    auto [verdict, attempts] = agents::call_with_repair<T>(send, prompt.text, parse);
    (void)attempts;
    return verdict;
}

Image masked_to_white(const Image& image, const BinaryMask& keep) {
    Image out(image.width(), image.height(), kWhite);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (keep.at(x, y)) out.set(x, y, image.at(x, y));
    return out;
}

// Per-record measurement; any per-metric dimension mismatch just leaves that
// metric unset.
void compute_metrics(RecordResult& result, const Image& original, const Image& completed,
                     const MetricConfig& metrics) {
    if (metrics.pixel_metrics) {
        Image vis_reference = original;
        Image vis_candidate = completed;
        if (result.record.visible_mask_path) {
            try {
                const BinaryMask visible = read_mask_png(*result.record.visible_mask_path);
                if (visible.width() == original.width() && visible.height() == original.height() &&
                    original.same_dims(completed)) {
                    vis_reference = masked_to_white(original, visible);
                    vis_candidate = masked_to_white(completed, visible);
                }
            } catch (const Error&) {
            }
        }
        if (vis_reference.same_dims(vis_candidate)) {
            try {
                result.vis_ssim = ssim(vis_reference, vis_candidate);
            } catch (const Error&) {
            }
            result.vis_psnr = psnr(vis_reference, vis_candidate);
        }
        if (result.record.gt_image_path) {
            try {
                const Image gt = read_png(*result.record.gt_image_path);
                if (gt.same_dims(completed)) {
                    result.gt_ssim = ssim(gt, completed);
                    result.gt_psnr = psnr(gt, completed);
                }
            } catch (const Error&) {
            }
        }
        if (result.record.gt_mask_path) {
            try {
                const BinaryMask gt_mask = read_mask_png(*result.record.gt_mask_path);
                if (gt_mask.width() == completed.width() && gt_mask.height() == completed.height())
                    result.gt_miou = iou(nonwhite_mask(completed), gt_mask);
            } catch (const Error&) {
            }
        }
    }
    if (metrics.embedding) {
        try {
            result.embedding_distance = metrics.embedding->distance(original, completed);
        } catch (const Error&) {
        } catch (const TransportError&) {
        }
    }
}

std::optional<double> mean_of(const std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

ordered_json optional_metric(const std::optional<double>& value) {
    if (!value) return nullptr;
    if (std::isinf(*value)) return *value > 0 ? "inf" : "-inf";
    return *value;
}

std::optional<double> metric_from_json(const nlohmann::json& value) {
    if (value.is_null()) return std::nullopt;
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw Error(ErrorKind::SchemaViolation, "unexpected metric string " + s);
    }
    return value.get<double>();
}

}  // namespace

BinaryMask nonwhite_mask(const Image& image) {
    BinaryMask mask(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            if (!(image.at(x, y) == kWhite)) mask.set(x, y);
    return mask;
}

agents::CompletenessVerdict judge_completeness(const Image& original, const Image& completed,
                                               const std::string& target, svc::ChatBackend& judge,
                                               const RetryPolicy& retry) {
    return judge_call<agents::CompletenessVerdict>(AgentRole::JudgeCompleteness, original,
                                                   completed, target, judge, retry,
                                                   agents::parse_completeness);
}

agents::ConsistencyVerdict judge_consistency(const Image& original, const Image& completed,
                                             const std::string& target, svc::ChatBackend& judge,
                                             const RetryPolicy& retry) {
    return judge_call<agents::ConsistencyVerdict>(AgentRole::JudgeConsistency, original, completed,
                                                  target, judge, retry, agents::parse_consistency);
}

EvalReport evaluate_dataset(const std::vector<EvalRecord>& records, svc::ChatBackend& judge,
                            const MetricConfig& metrics, const RetryPolicy& retry,
                            int parallelism) {
    require_deterministic_judge(judge);
    EvalReport report;
    report.judge_model = judge.model_name();
    report.template_versions["judge_completeness"] =
        agents::template_version(AgentRole::JudgeCompleteness);
    report.template_versions["judge_consistency"] =
        agents::template_version(AgentRole::JudgeConsistency);
    report.records.resize(records.size());

    auto evaluate_one = [&](std::size_t index) {
        RecordResult result;
        result.record = records[index];
        Image original, completed;
        try {
            original = read_png(result.record.original_path);
            completed = read_png(result.record.completed_path);
        } catch (const Error& e) {
            result.skipped = true;
            result.skip_reason = e.what();
            report.records[index] = std::move(result);
            return;
        }
        try {
            result.complete =
                judge_completeness(original, completed, result.record.target, judge, retry)
                    .complete;
            result.consistency =
                judge_consistency(original, completed, result.record.target, judge, retry);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::MalformedResponse || e.kind() == ErrorKind::SchemaViolation) {
                result.judge_error = true;
                result.complete.reset();
                result.consistency.reset();
            } else {
                throw;
            }
        }
        compute_metrics(result, original, completed, metrics);
        report.records[index] = std::move(result);
    };

    if (parallelism <= 1 || records.size() <= 1) {
        for (std::size_t i = 0; i < records.size(); ++i) evaluate_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        const int workers = std::min<int>(parallelism, static_cast<int>(records.size()));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1))
                    evaluate_one(i);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Single reduction after all records settle.
    std::map<std::string, std::vector<const RecordResult*>> by_method;
    for (const auto& r : report.records) by_method[r.record.method].push_back(&r);
    for (const auto& [method, rows] : by_method) {
        MethodAggregate agg;
        std::vector<double> cons, vssim, vpsnr, gssim, gpsnr, gmiou, embed;
        int complete_count = 0;
        for (const auto* r : rows) {
            ++agg.records;
            if (r->skipped) {
                ++agg.skips;
                continue;
            }
            if (r->judge_error) {
                ++agg.judge_errors;
            } else if (r->complete.has_value()) {
                ++agg.judged;
                if (*r->complete) ++complete_count;
                if (r->consistency) cons.push_back(r->consistency->total);
            }
            if (r->vis_ssim) vssim.push_back(*r->vis_ssim);
            if (r->vis_psnr) vpsnr.push_back(*r->vis_psnr);
            if (r->gt_ssim) gssim.push_back(*r->gt_ssim);
            if (r->gt_psnr) gpsnr.push_back(*r->gt_psnr);
            if (r->gt_miou) gmiou.push_back(*r->gt_miou);
            if (r->embedding_distance) embed.push_back(*r->embedding_distance);
        }
        if (agg.judged > 0)
            agg.mac_completeness_rate = 100.0 * complete_count / static_cast<double>(agg.judged);
        agg.mac_consistency_mean = mean_of(cons);
        agg.vis_ssim_mean = mean_of(vssim);
        agg.vis_psnr_mean = mean_of(vpsnr);
        agg.gt_ssim_mean = mean_of(gssim);
        agg.gt_psnr_mean = mean_of(gpsnr);
        agg.gt_miou_mean = mean_of(gmiou);
        agg.embedding_mean = mean_of(embed);
        report.aggregates[method] = agg;
    }
    return report;
}

int EvalReport::skip_count() const {
    int skips = 0;
    for (const auto& r : records)
        if (r.skipped) ++skips;
    return skips;
}

double EvalReport::skip_fraction() const {
    if (records.empty()) return 0.0;
    return static_cast<double>(skip_count()) / static_cast<double>(records.size());
}

std::vector<EvalRecord> load_manifest(const std::string& path) {
    std::vector<EvalRecord> records;
    const std::string content = read_text_file(path);
    std::istringstream stream(content);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation,
                        "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        EvalRecord rec;
        try {
            rec.method = doc.at("method").get<std::string>();
            rec.sample_id = doc.at("sample_id").get<std::string>();
            rec.original_path = doc.at("original").get<std::string>();
            rec.completed_path = doc.at("completed").get<std::string>();
            rec.target = doc.at("target").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::SchemaViolation,
                        "manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        if (doc.contains("gt_image")) rec.gt_image_path = doc["gt_image"].get<std::string>();
        if (doc.contains("gt_mask")) rec.gt_mask_path = doc["gt_mask"].get<std::string>();
        if (doc.contains("visible_mask"))
            rec.visible_mask_path = doc["visible_mask"].get<std::string>();
        records.push_back(std::move(rec));
    }
    return records;
}

std::string report_to_json(const EvalReport& report) {
    ordered_json records = ordered_json::array();
    for (const auto& r : report.records) {
        ordered_json row = {
            {"method", r.record.method},
            {"sample_id", r.record.sample_id},
            {"target", r.record.target},
            {"skipped", r.skipped},
            {"skip_reason", r.skip_reason},
            {"judge_error", r.judge_error},
            {"complete", r.complete ? ordered_json(*r.complete) : ordered_json(nullptr)},
            {"consistency",
             r.consistency ? ordered_json({{"structural", r.consistency->structural},
                                           {"semantic", r.consistency->semantic},
                                           {"realism", r.consistency->realism},
                                           {"total", r.consistency->total}})
                           : ordered_json(nullptr)},
            {"vis_ssim", optional_metric(r.vis_ssim)},
            {"vis_psnr", optional_metric(r.vis_psnr)},
            {"gt_ssim", optional_metric(r.gt_ssim)},
            {"gt_psnr", optional_metric(r.gt_psnr)},
            {"gt_miou", optional_metric(r.gt_miou)},
            {"embedding_distance", optional_metric(r.embedding_distance)},
        };
        records.push_back(std::move(row));
    }
    ordered_json aggregates = ordered_json::object();
    for (const auto& [method, agg] : report.aggregates) {
        aggregates[method] = {
            {"records", agg.records},
            {"judged", agg.judged},
            {"judge_errors", agg.judge_errors},
            {"skips", agg.skips},
            {"mac_completeness_rate", optional_metric(agg.mac_completeness_rate)},
            {"mac_consistency_mean", optional_metric(agg.mac_consistency_mean)},
            {"vis_ssim_mean", optional_metric(agg.vis_ssim_mean)},
            {"vis_psnr_mean", optional_metric(agg.vis_psnr_mean)},
            {"gt_ssim_mean", optional_metric(agg.gt_ssim_mean)},
            {"gt_psnr_mean", optional_metric(agg.gt_psnr_mean)},
            {"gt_miou_mean", optional_metric(agg.gt_miou_mean)},
            {"embedding_mean", optional_metric(agg.embedding_mean)},
        };
    }
    ordered_json versions = ordered_json::object();
    for (const auto& [name, version] : report.template_versions) versions[name] = version;
    ordered_json doc = {{"judge_model", report.judge_model},
                        {"template_versions", versions},
                        {"records", records},
                        {"aggregates", aggregates}};
    return doc.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    EvalReport report;
    report.judge_model = doc.at("judge_model").get<std::string>();
    for (const auto& [name, version] : doc.at("template_versions").items())
        report.template_versions[name] = version.get<std::string>();
    for (const auto& row : doc.at("records")) {
        RecordResult r;
        r.record.method = row.at("method").get<std::string>();
        r.record.sample_id = row.at("sample_id").get<std::string>();
        r.record.target = row.at("target").get<std::string>();
        r.skipped = row.at("skipped").get<bool>();
        r.skip_reason = row.at("skip_reason").get<std::string>();
        r.judge_error = row.at("judge_error").get<bool>();
        if (!row.at("complete").is_null()) r.complete = row["complete"].get<bool>();
        if (!row.at("consistency").is_null()) {
            agents::ConsistencyVerdict v;
            v.structural = row["consistency"].at("structural").get<int>();
            v.semantic = row["consistency"].at("semantic").get<int>();
            v.realism = row["consistency"].at("realism").get<int>();
            v.total = row["consistency"].at("total").get<int>();
            r.consistency = v;
        }
        r.vis_ssim = metric_from_json(row.at("vis_ssim"));
        r.vis_psnr = metric_from_json(row.at("vis_psnr"));
        r.gt_ssim = metric_from_json(row.at("gt_ssim"));
        r.gt_psnr = metric_from_json(row.at("gt_psnr"));
        r.gt_miou = metric_from_json(row.at("gt_miou"));
        r.embedding_distance = metric_from_json(row.at("embedding_distance"));
        report.records.push_back(std::move(r));
    }
    for (const auto& [method, agg_doc] : doc.at("aggregates").items()) {
        MethodAggregate agg;
        agg.records = agg_doc.at("records").get<int>();
        agg.judged = agg_doc.at("judged").get<int>();
        agg.judge_errors = agg_doc.at("judge_errors").get<int>();
        agg.skips = agg_doc.at("skips").get<int>();
        agg.mac_completeness_rate = metric_from_json(agg_doc.at("mac_completeness_rate"));
        agg.mac_consistency_mean = metric_from_json(agg_doc.at("mac_consistency_mean"));
        agg.vis_ssim_mean = metric_from_json(agg_doc.at("vis_ssim_mean"));
        agg.vis_psnr_mean = metric_from_json(agg_doc.at("vis_psnr_mean"));
        agg.gt_ssim_mean = metric_from_json(agg_doc.at("gt_ssim_mean"));
        agg.gt_psnr_mean = metric_from_json(agg_doc.at("gt_psnr_mean"));
        agg.gt_miou_mean = metric_from_json(agg_doc.at("gt_miou_mean"));
        agg.embedding_mean = metric_from_json(agg_doc.at("embedding_mean"));
        report.aggregates[method] = agg;
    }
    return report;
}

std::string render_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "method                      n   comp%   cons   vis-ssim  gt-miou  skips  errors\n";
    out << "------------------------------------------------------------------------------\n";
    auto cell = [](const std::optional<double>& v, int digits) {
        if (!v) return std::string("-");
        if (std::isinf(*v)) return std::string("inf");
        return format_fixed(*v, digits);
    };
    for (const auto& [method, agg] : report.aggregates) {
        char line[256];
        std::snprintf(line, sizeof(line), "%-25s %3d %7s %6s %9s %8s %6d %7d\n", method.c_str(),
                      agg.records, cell(agg.mac_completeness_rate, 1).c_str(),
                      cell(agg.mac_consistency_mean, 2).c_str(), cell(agg.vis_ssim_mean, 3).c_str(),
                      cell(agg.gt_miou_mean, 3).c_str(), agg.skips, agg.judge_errors);
        out << line;
    }
    return out.str();
}

}  // namespace amodal::eval
