// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/rouge.hpp"

#include <algorithm>
#include <map>

#include "adfg/common/error.hpp"
#include "adfg/evalmetrics/ngram.hpp"

namespace adfg::evalmetrics {

double f1_score(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

PrecisionRecall rouge_n(const Tokens& candidate, const Tokens& reference, std::int32_t n) {
    ADFG_REQUIRE(n >= 1, ErrorKind::input, "rouge_n: n must be at least 1");
    const NgramCounts c = ngram_counts(candidate, n);
    const NgramCounts r = ngram_counts(reference, n);
    const std::int64_t nc = ngram_total(candidate, n), nr = ngram_total(reference, n);
    PrecisionRecall out;
    if (nc == 0 || nr == 0) return out;
    const std::int64_t hits = clipped_matches(c, r);
    out.precision = static_cast<double>(hits) / static_cast<double>(nc);
    out.recall = static_cast<double>(hits) / static_cast<double>(nr);
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

PrecisionRecall rouge_n(std::string_view candidate, std::string_view reference, std::int32_t n) {
    return rouge_n(metric_tokens(candidate), metric_tokens(reference), n);
}

std::int64_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::int64_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

PrecisionRecall rouge_l(const Tokens& candidate, const Tokens& reference) {
    PrecisionRecall out;
    if (candidate.empty() || reference.empty()) return out;
    const auto l = static_cast<double>(lcs_length(candidate, reference));
    out.precision = l / static_cast<double>(candidate.size());
    out.recall = l / static_cast<double>(reference.size());
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

PrecisionRecall rouge_l(std::string_view candidate, std::string_view reference) {
    return rouge_l(metric_tokens(candidate), metric_tokens(reference));
}

}  // namespace adfg::evalmetrics
