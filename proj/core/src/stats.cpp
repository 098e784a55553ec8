// Copyright (c) 2026 the amodalkit authors
// SPDX-License-Identifier: Apache-2.0

#include "amodal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "amodal/metrics.hpp"
#include "amodal/util.hpp"

namespace amodal::stats {

namespace {

void require_pair(std::size_t nx, std::size_t ny) {
    if (nx != ny) throw Error(ErrorKind::BadArgument, "correlation inputs differ in length");
    if (nx < 3)
        throw Error(ErrorKind::UndefinedCorrelation, "correlation needs at least 3 observations");
}

// Average ranks (mid-rank method) for ties.
std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
    require_pair(x.size(), y.size());
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error(ErrorKind::UndefinedCorrelation, "constant input vector");
    return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    require_pair(x.size(), y.size());
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

double point_biserial(std::span<const int> binary, std::span<const double> y) {
    require_pair(binary.size(), y.size());
    const double n = static_cast<double>(binary.size());
    double sum1 = 0, sum0 = 0;
    std::size_t n1 = 0, n0 = 0;
    for (std::size_t i = 0; i < binary.size(); ++i) {
        if (binary[i] != 0 && binary[i] != 1)
            throw Error(ErrorKind::BadArgument, "binary vector entries must be 0 or 1");
        if (binary[i] == 1) {
            sum1 += y[i];
            ++n1;
        } else {
            sum0 += y[i];
            ++n0;
        }
    }
    if (n1 == 0 || n0 == 0)
        throw Error(ErrorKind::UndefinedCorrelation, "binary vector has a single class");
    const double mean1 = sum1 / static_cast<double>(n1);
    const double mean0 = sum0 / static_cast<double>(n0);
    double my = 0;
    for (double v : y) my += v;
    my /= n;
    double var = 0;
    for (double v : y) var += (v - my) * (v - my);
    var /= n;  // population variance, which makes r_pb == pearson exactly
    if (var == 0.0) throw Error(ErrorKind::UndefinedCorrelation, "constant continuous vector");
    const double p = static_cast<double>(n1) / n;
    const double q = static_cast<double>(n0) / n;
    return (mean1 - mean0) * std::sqrt(p * q) / std::sqrt(var);
}

double pairwise_diversity(const std::vector<Image>& images, const ImageDistance& distance) {
    if (images.empty()) throw Error(ErrorKind::BadArgument, "diversity needs at least one image");
    if (images.size() == 1) return 0.0;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (std::size_t j = i + 1; j < images.size(); ++j) {
            total += distance(images[i], images[j]);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

double ssim_complement_distance(const Image& a, const Image& b) { return 1.0 - ssim(a, b); }

RatingTable RatingTable::load_csv(const std::string& path) {
    return from_csv_text(read_text_file(path));
}

RatingTable RatingTable::from_csv_text(const std::string& text) {
    RatingTable table;
    std::istringstream stream(text);
    std::string line;
    bool header = true;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "sample_id,method,rater_id,completeness,consistency,preference")
                throw Error(ErrorKind::SchemaViolation, "unexpected ratings CSV header: " + line);
            header = false;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 6)
            throw Error(ErrorKind::SchemaViolation,
                        "ratings CSV line " + std::to_string(line_no) + ": expected 6 columns");
        RatingRow row;
        row.sample_id = parts[0];
        row.method = parts[1];
        row.rater_id = parts[2];
        try {
            row.completeness = std::stoi(parts[3]);
            row.consistency = std::stod(parts[4]);
        } catch (const std::exception&) {
            throw Error(ErrorKind::SchemaViolation,
                        "ratings CSV line " + std::to_string(line_no) + ": bad number");
        }
        if (parts[5] == "1" || parts[5] == "true") row.preference = true;
        else if (parts[5] == "0" || parts[5] == "false") row.preference = false;
        else
            throw Error(ErrorKind::SchemaViolation,
                        "ratings CSV line " + std::to_string(line_no) + ": bad preference flag");
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::map<std::string, UserStudyAggregate> aggregate_user_study(
    const RatingTable& table, std::vector<RowRejection>* rejections) {
    // Row-level range checks first, then the one-preference-per-(sample,rater)
    // structural check over the surviving rows.
    std::map<std::string, std::vector<const RatingRow*>> groups;
    auto reject = [&](const std::string& key, const std::string& reason) {
        if (rejections) rejections->push_back({key, reason});
    };
    for (const auto& row : table.rows) {
        const std::string key = row.sample_id + ":" + row.rater_id;
        if (row.completeness != 0 && row.completeness != 1) {
            reject(key, "completeness vote must be 0 or 1");
            continue;
        }
        if (row.consistency < 1.0 || row.consistency > 10.0) {
            reject(key, "consistency rating must be in [1,10]");
            continue;
        }
        groups[key].push_back(&row);
    }

    std::vector<const RatingRow*> accepted;
    std::size_t accepted_groups = 0;
    for (const auto& [key, rows] : groups) {
        int flags = 0;
        for (const auto* row : rows) flags += row->preference ? 1 : 0;
        if (flags != 1) {
            reject(key, flags == 0 ? "no preference flag in trial" : "multiple preference flags");
            continue;
        }
        ++accepted_groups;
        accepted.insert(accepted.end(), rows.begin(), rows.end());
    }

    std::map<std::string, UserStudyAggregate> result;
    std::map<std::string, std::pair<double, double>> sums;  // completeness, consistency
    std::map<std::string, int> preferences;
    for (const auto* row : accepted) {
        auto& agg = result[row->method];
        ++agg.rows;
        sums[row->method].first += row->completeness;
        sums[row->method].second += row->consistency;
        if (row->preference) ++preferences[row->method];
    }
    for (auto& [method, agg] : result) {
        agg.completeness_percent = 100.0 * sums[method].first / agg.rows;
        agg.consistency_mean = sums[method].second / agg.rows;
        agg.preference_percent =
            accepted_groups == 0
                ? 0.0
                : 100.0 * preferences[method] / static_cast<double>(accepted_groups);
    }
    return result;
}

namespace {

struct JoinedRow {
    std::string method;
    std::optional<double> vis_ssim;
    std::optional<double> vis_psnr;
    std::optional<int> mac_complete;
    std::optional<double> mac_consistency;
    std::map<std::string, std::optional<double>> targets;
};

CorrelationCell correlate_cell(const std::vector<JoinedRow>& rows, const std::string& predictor,
                               const std::string& target) {
    std::vector<double> xs, ys;
    std::vector<int> bins;
    const bool binary = predictor == "mac_completeness";
    for (const auto& row : rows) {
        std::optional<double> x;
        if (predictor == "vis_ssim") x = row.vis_ssim;
        else if (predictor == "vis_psnr") x = row.vis_psnr;
        else if (predictor == "mac_consistency") x = row.mac_consistency;
        std::optional<int> b = binary ? row.mac_complete : std::nullopt;
        const auto it = row.targets.find(target);
        const std::optional<double> y = it == row.targets.end() ? std::nullopt : it->second;
        if (!y || (!binary && !x) || (binary && !b)) continue;
        if (binary) bins.push_back(*b);
        else xs.push_back(*x);
        ys.push_back(*y);
    }
    CorrelationCell cell;
    cell.n = static_cast<int>(ys.size());
    try {
        double value;
        if (binary) {
            value = point_biserial(bins, ys);
            cell.kind = "point_biserial";
        } else {
            value = spearman(xs, ys);
            cell.kind = "spearman";
        }
        if (std::isnan(value)) throw Error(ErrorKind::UndefinedCorrelation, "nan");
        cell.value = value;
    } catch (const Error&) {
        cell.kind = "undefined";
    }
    return cell;
}

CorrelationMatrix correlate_joined(const std::vector<JoinedRow>& rows,
                                   const std::vector<std::string>& targets,
                                   CorrelationScope scope) {
    if (rows.empty())
        throw Error(ErrorKind::NoOverlap, "no joinable (sample, method) rows");
    CorrelationMatrix matrix;
    matrix.predictors = {"vis_ssim", "vis_psnr", "mac_completeness", "mac_consistency"};
    matrix.targets = targets;
    for (const auto& predictor : matrix.predictors) {
        std::vector<CorrelationCell> row_cells;
        for (const auto& target : targets) {
            if (scope == CorrelationScope::Pooled) {
                row_cells.push_back(correlate_cell(rows, predictor, target));
                continue;
            }
            // Within-method: plain mean of per-method coefficients.
            std::map<std::string, std::vector<JoinedRow>> by_method;
            for (const auto& r : rows) by_method[r.method].push_back(r);
            std::vector<double> values;
            int total_n = 0;
            for (const auto& [method, subset] : by_method) {
                const CorrelationCell cell = correlate_cell(subset, predictor, target);
                if (cell.value) {
                    values.push_back(*cell.value);
                    total_n += cell.n;
                }
            }
            CorrelationCell cell;
            cell.n = total_n;
            if (!values.empty()) {
                double sum = 0;
                for (double v : values) sum += v;
                cell.value = sum / static_cast<double>(values.size());
                cell.kind = predictor == "mac_completeness" ? "point_biserial" : "spearman";
            } else {
                cell.kind = "undefined";
            }
            row_cells.push_back(cell);
        }
        matrix.cells.push_back(std::move(row_cells));
    }
    return matrix;
}

}  // namespace

CorrelationMatrix correlate_metrics(const eval::EvalReport& report, const RatingTable& ratings,
                                    CorrelationScope scope) {
    // Human targets per (sample, method): mean vote share and mean rating.
    std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>>
        human;
    for (const auto& row : ratings.rows) {
        auto& entry = human[{row.sample_id, row.method}];
        entry.first.push_back(row.completeness);
        entry.second.push_back(row.consistency);
    }
    std::vector<JoinedRow> rows;
    for (const auto& r : report.records) {
        if (r.skipped) continue;
        const auto it = human.find({r.record.sample_id, r.record.method});
        if (it == human.end()) continue;
        JoinedRow joined;
        joined.method = r.record.method;
        joined.vis_ssim = r.vis_ssim;
        joined.vis_psnr = r.vis_psnr;
        if (r.complete) joined.mac_complete = *r.complete ? 1 : 0;
        if (r.consistency) joined.mac_consistency = r.consistency->total;
        auto mean = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x;
            return s / static_cast<double>(v.size());
        };
        joined.targets["human_completeness"] = mean(it->second.first);
        joined.targets["human_consistency"] = mean(it->second.second);
        rows.push_back(std::move(joined));
    }
    return correlate_joined(rows, {"human_completeness", "human_consistency"}, scope);
}

CorrelationMatrix correlate_metrics(const eval::EvalReport& report) {
    std::vector<JoinedRow> rows;
    for (const auto& r : report.records) {
        if (r.skipped) continue;
        if (!r.gt_ssim && !r.gt_psnr && !r.gt_miou) continue;
        JoinedRow joined;
        joined.method = r.record.method;
        joined.vis_ssim = r.vis_ssim;
        joined.vis_psnr = r.vis_psnr;
        if (r.complete) joined.mac_complete = *r.complete ? 1 : 0;
        if (r.consistency) joined.mac_consistency = r.consistency->total;
        joined.targets["gt_ssim"] = r.gt_ssim;
        joined.targets["gt_psnr"] = r.gt_psnr;
        joined.targets["gt_miou"] = r.gt_miou;
        rows.push_back(std::move(joined));
    }
    return correlate_joined(rows, {"gt_ssim", "gt_psnr", "gt_miou"}, CorrelationScope::Pooled);
}

std::string CorrelationMatrix::to_json() const {
    nlohmann::ordered_json cells_json = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < predictors.size(); ++i) {
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const auto& cell = cells[i][j];
            cells_json.push_back(
                {{"predictor", predictors[i]},
                 {"target", targets[j]},
                 {"value", cell.value ? nlohmann::ordered_json(*cell.value)
                                      : nlohmann::ordered_json(nullptr)},
                 {"kind", cell.kind},
                 {"n", cell.n}});
        }
    }
    nlohmann::ordered_json doc = {
        {"predictors", predictors}, {"targets", targets}, {"cells", cells_json}};
    return doc.dump(2) + "\n";
}

std::string CorrelationMatrix::render_table() const {
    std::ostringstream out;
    out << "predictor          ";
    for (const auto& t : targets) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), " %20s", t.c_str());
        out << cell;
    }
    out << "\n";
    for (std::size_t i = 0; i < predictors.size(); ++i) {
        char head[32];
        std::snprintf(head, sizeof(head), "%-19s", predictors[i].c_str());
        out << head;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const auto& cell = cells[i][j];
            char text[32];
            if (cell.value)
                std::snprintf(text, sizeof(text), " %20.3f", *cell.value);
            else
                std::snprintf(text, sizeof(text), " %20s", "-");
            out << text;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace amodal::stats
