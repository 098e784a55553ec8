// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amodal/agent_protocol.hpp"
#include "amodal/backends.hpp"
#include "amodal/config.hpp"
#include "amodal/types.hpp"

namespace amodal::eval {

struct EvalRecord {
    std::string method;
    std::string sample_id;
    std::string original_path;
    std::string completed_path;
    std::string target;
    std::optional<std::string> gt_image_path;
    std::optional<std::string> gt_mask_path;
    std::optional<std::string> visible_mask_path;
};

struct RecordResult {
    EvalRecord record;
    bool skipped = false;
    std::string skip_reason;
    bool judge_error = false;
    std::optional<bool> complete;
    std::optional<agents::ConsistencyVerdict> consistency;
    std::optional<double> vis_ssim;
    std::optional<double> vis_psnr;
    std::optional<double> gt_ssim;
    std::optional<double> gt_psnr;
    std::optional<double> gt_miou;
    std::optional<double> embedding_distance;
};

struct MethodAggregate {
    int records = 0;
    int judged = 0;
    int judge_errors = 0;
    int skips = 0;
    std::optional<double> mac_completeness_rate;  // percent of judged records
    std::optional<double> mac_consistency_mean;   // 0..10
    std::optional<double> vis_ssim_mean;
    std::optional<double> vis_psnr_mean;
    std::optional<double> gt_ssim_mean;
    std::optional<double> gt_psnr_mean;
    std::optional<double> gt_miou_mean;
    std::optional<double> embedding_mean;
};

struct EvalReport {
    std::string judge_model;
    std::map<std::string, std::string> template_versions;
    std::vector<RecordResult> records;
    std::map<std::string, MethodAggregate> aggregates;

    int skip_count() const;
    double skip_fraction() const;
};

struct MetricConfig {
    bool pixel_metrics = true;  // native SSIM/PSNR/mIoU
    std::shared_ptr<svc::EmbeddingDistanceBackend> embedding;
};

/// One completeness judgment; requires judge temperature 0. Parse failures
/// follow the two-re-prompt repair policy, then throw.
agents::CompletenessVerdict judge_completeness(const Image& original, const Image& completed,
                                               const std::string& target,
                                               svc::ChatBackend& judge,
                                               const RetryPolicy& retry);

agents::ConsistencyVerdict judge_consistency(const Image& original, const Image& completed,
                                             const std::string& target, svc::ChatBackend& judge,
                                             const RetryPolicy& retry);

/// Judges and measures every record, then aggregates per method. Records
/// with unresolvable image refs are skipped with a reason; judge failures
/// are excluded from aggregates but counted.
EvalReport evaluate_dataset(const std::vector<EvalRecord>& records, svc::ChatBackend& judge,
                            const MetricConfig& metrics, const RetryPolicy& retry = {},
                            int parallelism = 1);

std::vector<EvalRecord> load_manifest(const std::string& path);  // JSON lines
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
std::string render_report_table(const EvalReport& report);

/// Pixels that differ from the white canvas background; the pipeline's
/// completed-object convention for deriving the predicted amodal mask.
BinaryMask nonwhite_mask(const Image& image);

}  // namespace amodal::eval
