// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adfg::evalmetrics {

/// (R1 · R2 · RL)^(1/3) when all three are positive, else 0.
double rouge_geo(double rouge1, double rouge2, double rougeL);

/// Metric names in report order.
inline constexpr std::string_view kRouge1 = "rouge1";
inline constexpr std::string_view kRouge2 = "rouge2";
inline constexpr std::string_view kRougeL = "rougeL";
inline constexpr std::string_view kRougeGeo = "rouge_geo";
inline constexpr std::string_view kBleu = "bleu";
inline constexpr std::string_view kMeteor = "meteor";
inline constexpr std::string_view kPerplexity = "perplexity";

/// Perplexity is the only lower-is-better metric; plugin names default to higher-is-better.
bool higher_is_better(std::string_view metric);

struct MetricReport {
    std::string system;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double rouge_geo = 0.0;
    double bleu = 0.0;
    double meteor = 0.0;
    std::optional<double> perplexity;
    std::map<std::string, double> plugins;
    std::map<std::string, bool> plugin_orientation;
    std::int64_t examples = 0;
    std::int64_t failures = 0;

    /// Every metric as (name, value) in report order, plugins last.
    std::vector<std::pair<std::string, double>> values() const;
    std::optional<double> get(std::string_view name) const;
    bool higher_better(std::string_view name) const;
    /// |rouge_geo − (R1·R2·RL)^(1/3)| ≤ tol.
    bool rouge_geo_consistent(double tol = 1e-12) const;
};

/// One system per line: id, then name=value fields separated by tabs.
std::string report_line(const MetricReport& report);
std::string report_lines(const std::vector<MetricReport>& reports);
std::vector<MetricReport> parse_report_lines(std::string_view text);
/// Aligned human-readable table, one row per system; the header marks lower-is-better columns with (-).
std::string report_table(const std::vector<MetricReport>& reports);

}  // namespace adfg::evalmetrics
