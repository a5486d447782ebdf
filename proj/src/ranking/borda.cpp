// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/ranking/borda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

namespace adfg::ranking {

void ScoreMatrix::validate() const {
    ADFG_REQUIRE(candidates.size() >= 2, ErrorKind::input, "score matrix needs at least two candidates");
    ADFG_REQUIRE(!metrics.empty(), ErrorKind::input, "score matrix needs at least one metric");
    ADFG_REQUIRE(values.size() == candidates.size(), ErrorKind::input, "score matrix: one value row per candidate");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ADFG_REQUIRE(seen.insert(candidates[i]).second, ErrorKind::input, "duplicate candidate: " + candidates[i]);
        ADFG_REQUIRE(values[i].size() == metrics.size(), ErrorKind::input,
                "score matrix: row '" + candidates[i] + "' has " + std::to_string(values[i].size()) + " cells, expected " +
                    std::to_string(metrics.size()));
        for (double v : values[i]) {
            ADFG_REQUIRE(std::isfinite(v), ErrorKind::input, "score matrix: non-finite cell in row '" + candidates[i] + "'");
        }
    }
}

ScoreMatrix ScoreMatrix::select_metrics(const std::vector<std::string>& names) const {
    ScoreMatrix out;
    out.candidates = candidates;
    out.values.assign(candidates.size(), {});
    for (const std::string& n : names) {
        auto it = std::find_if(metrics.begin(), metrics.end(), [&n](const MetricColumn& m) { return m.name == n; });
        ADFG_REQUIRE(it != metrics.end(), ErrorKind::input, "score matrix has no metric '" + n + "'");
        const auto col = static_cast<std::size_t>(it - metrics.begin());
        out.metrics.push_back(*it);
        for (std::size_t i = 0; i < candidates.size(); ++i) out.values[i].push_back(values[i][col]);
    }
    return out;
}

const RankEntry& RankTable::at(std::string_view candidate) const {
    for (const RankEntry& e : entries) {
        if (e.candidate == candidate) return e;
    }
    fail(ErrorKind::input, "rank table has no candidate '" + std::string(candidate) + "'");
}

RankTable borda_rank(const ScoreMatrix& scores) {
    scores.validate();
    const std::size_t n = scores.candidates.size();
    std::vector<double> points(n, 0.0);
    RankTable table;
    for (std::size_t m = 0; m < scores.metrics.size(); ++m) {
        const bool higher = scores.metrics[m].higher_is_better;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = scores.values[a][m], vb = scores.values[b][m];
            return higher ? va > vb : va < vb;
        });
        for (std::size_t p = 0; p < n;) {
            std::size_t q = p;
            while (q + 1 < n && scores.values[order[q + 1]][m] == scores.values[order[p]][m]) ++q;
            // positions p..q share the mean of their points (n−1−p + n−1−q) / 2
            const double share = static_cast<double>(2 * (n - 1) - p - q) / 2.0;
            for (std::size_t r = p; r <= q; ++r) points[order[r]] += share;
            if (q > p) {
                std::vector<std::string> ids;
                for (std::size_t r = p; r <= q; ++r) ids.push_back(scores.candidates[order[r]]);
                std::sort(ids.begin(), ids.end());
                std::string note = scores.metrics[m].name + ": ";
                for (std::size_t r = 0; r < ids.size(); ++r) note += (r ? ", " : "") + ids[r];
                table.tie_notes.push_back(note + " tie and share " + fixed(share, 2) + " points each");
            }
            p = q + 1;
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a] != points[b]) return points[a] > points[b];
        return scores.candidates[a] < scores.candidates[b];
    });
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t c = order[r];
        table.entries.push_back({scores.candidates[c], points[c], static_cast<std::int32_t>(r + 1)});
        if (r > 0 && points[order[r - 1]] == points[c]) {
            table.tie_notes.push_back("total: " + scores.candidates[order[r - 1]] + " and " + scores.candidates[c] +
                                      " tie at " + fixed(points[c], 2) + " points; ordered by id");
        }
    }
    return table;
}

std::vector<std::string> top_k(const RankTable& table, std::int64_t k, std::string* warning) {
    ADFG_REQUIRE(k >= 1, ErrorKind::input, "top_k: k must be at least 1");
    const auto n = static_cast<std::int64_t>(table.entries.size());
    if (k > n) {
        if (warning != nullptr) {
            *warning = "top_k: asked for " + std::to_string(k) + " of " + std::to_string(n) + " candidates";
        }
        k = n;
    }
    std::vector<std::string> out;
    for (std::int64_t i = 0; i < k; ++i) out.push_back(table.entries[static_cast<std::size_t>(i)].candidate);
    return out;
}

}  // namespace adfg::ranking
