// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace adfg::evalmetrics {

struct BleuDetail {
    double score = 0.0;
    double brevity_penalty = 0.0;
    std::array<double, 4> precisions{};
    std::int64_t candidate_length = 0;
    std::int64_t reference_length = 0;
};

/// Corpus BLEU over 1..4-grams: geometric mean of modified precisions times
/// exp(1 − r/c) when c < r. An order with no clipped match uses
/// 1 / (2 · max(1, candidate n-grams)) in place of 0. Empty candidates score 0.
BleuDetail bleu_detail(const std::vector<std::string>& candidates, const std::vector<std::string>& references);
double bleu(const std::vector<std::string>& candidates, const std::vector<std::string>& references);

}  // namespace adfg::evalmetrics
