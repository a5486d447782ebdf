// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace adfg::ranking {

struct MetricColumn {
    std::string name;
    bool higher_is_better = true;
    bool operator==(const MetricColumn&) const = default;
};

/// Candidates × metrics, no missing cells.
struct ScoreMatrix {
    std::vector<std::string> candidates;
    std::vector<MetricColumn> metrics;
    std::vector<std::vector<double>> values;

    /// ErrorKind::input on an empty or ragged matrix, a non-finite cell or a duplicate id.
    void validate() const;
    /// Keeps only the named columns, in the given order.
    ScoreMatrix select_metrics(const std::vector<std::string>& names) const;
    bool operator==(const ScoreMatrix&) const = default;
};

struct RankEntry {
    std::string candidate;
    double points = 0.0;
    std::int32_t rank = 0;
    bool operator==(const RankEntry&) const = default;
};

struct RankTable {
    /// Best first; ranks are 1..n.
    std::vector<RankEntry> entries;
    std::vector<std::string> tie_notes;

    const RankEntry& at(std::string_view candidate) const;
    std::int32_t rank_of(std::string_view candidate) const { return at(candidate).rank; }
};

/// Per metric, position p (0-based, best first) earns n − 1 − p points and
/// exactly equal values share the mean of the points they span. Totals are
/// summed across metrics; equal totals are ordered by candidate id and noted.
RankTable borda_rank(const ScoreMatrix& scores);

/// The k best candidates in rank order; k > n returns all of them and sets `warning`.
std::vector<std::string> top_k(const RankTable& table, std::int64_t k, std::string* warning = nullptr);

}  // namespace adfg::ranking
