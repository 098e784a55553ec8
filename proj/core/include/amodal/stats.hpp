// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amodal/mac_eval.hpp"
#include "amodal/types.hpp"

namespace amodal::stats {

/// Pearson correlation; throws UndefinedCorrelation on constant input or
/// length < 3 / mismatched lengths.
double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Point-biserial correlation of a binary against a continuous variable
/// (population-std convention, so it equals pearson on the 0/1 coding).
double point_biserial(std::span<const int> binary, std::span<const double> y);

using ImageDistance = std::function<double(const Image&, const Image&)>;

/// Mean distance over all unordered pairs; one image yields 0.
double pairwise_diversity(const std::vector<Image>& images, const ImageDistance& distance);

/// 1 - SSIM as a native image distance.
double ssim_complement_distance(const Image& a, const Image& b);

struct RatingRow {
    std::string sample_id;
    std::string method;
    std::string rater_id;
    int completeness = 0;      // 0/1 vote
    double consistency = 0.0;  // 1..10
    bool preference = false;   // best-of-sample flag
};

struct RatingTable {
    std::vector<RatingRow> rows;

    /// CSV with header sample_id,method,rater_id,completeness,consistency,preference.
    static RatingTable load_csv(const std::string& path);
    static RatingTable from_csv_text(const std::string& text);
};

struct UserStudyAggregate {
    int rows = 0;
    double completeness_percent = 0.0;
    double consistency_mean = 0.0;
    double preference_percent = 0.0;
};

struct RowRejection {
    std::string key;  // "sample:rater"
    std::string reason;
};

/// Per-method study aggregates. (sample, rater) groups violating the
/// one-preference-flag invariant are rejected and reported.
std::map<std::string, UserStudyAggregate> aggregate_user_study(
    const RatingTable& table, std::vector<RowRejection>* rejections = nullptr);

struct CorrelationCell {
    std::optional<double> value;
    std::string kind;  // "spearman" | "point_biserial" | "undefined"
    int n = 0;
};

struct CorrelationMatrix {
    std::vector<std::string> predictors;
    std::vector<std::string> targets;
    std::vector<std::vector<CorrelationCell>> cells;  // [predictor][target]

    std::string to_json() const;
    std::string render_table() const;
};

enum class CorrelationScope { Pooled, WithinMethod };

/// Predictors (vis metrics + MAC scores) against human study aggregates,
/// joined per (sample, method). MAC-Completeness is binary and correlates
/// point-biserially. Throws NoOverlap on an empty join.
CorrelationMatrix correlate_metrics(const eval::EvalReport& report, const RatingTable& ratings,
                                    CorrelationScope scope = CorrelationScope::Pooled);

/// Predictors against the ground-truth metrics inside the same report.
CorrelationMatrix correlate_metrics(const eval::EvalReport& report);

}  // namespace amodal::stats
