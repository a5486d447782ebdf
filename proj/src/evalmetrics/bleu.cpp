// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/bleu.hpp"

#include <algorithm>
#include <cmath>

#include "adfg/common/error.hpp"
#include "adfg/evalmetrics/ngram.hpp"

namespace adfg::evalmetrics {

BleuDetail bleu_detail(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
    ADFG_REQUIRE(candidates.size() == references.size(), ErrorKind::input,
            "bleu: " + std::to_string(candidates.size()) + " candidates against " +
                std::to_string(references.size()) + " references");
    std::array<std::int64_t, 4> hits{}, totals{};
    BleuDetail d;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Tokens c = metric_tokens(candidates[i]);
        const Tokens r = metric_tokens(references[i]);
        d.candidate_length += static_cast<std::int64_t>(c.size());
        d.reference_length += static_cast<std::int64_t>(r.size());
        for (std::int32_t n = 1; n <= 4; ++n) {
            hits[static_cast<std::size_t>(n - 1)] += clipped_matches(ngram_counts(c, n), ngram_counts(r, n));
            totals[static_cast<std::size_t>(n - 1)] += ngram_total(c, n);
        }
    }
    if (d.candidate_length == 0) return d;
    double log_sum = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double p = hits[k] > 0 ? static_cast<double>(hits[k]) / static_cast<double>(totals[k])
                                     : 1.0 / (2.0 * static_cast<double>(std::max<std::int64_t>(1, totals[k])));
        d.precisions[k] = p;
        log_sum += std::log(p);
    }
    const auto c = static_cast<double>(d.candidate_length), r = static_cast<double>(d.reference_length);
    d.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
    d.score = d.brevity_penalty * std::exp(log_sum / 4.0);
    return d;
}

double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
    return bleu_detail(candidates, references).score;
}

}  // namespace adfg::evalmetrics
