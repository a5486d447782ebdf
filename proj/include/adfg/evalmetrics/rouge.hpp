// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "adfg/evalmetrics/tokenize.hpp"

namespace adfg::evalmetrics {

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// n-gram overlap with clipped counts. Degenerate inputs score 0.
PrecisionRecall rouge_n(const Tokens& candidate, const Tokens& reference, std::int32_t n);
PrecisionRecall rouge_n(std::string_view candidate, std::string_view reference, std::int32_t n);

/// Longest-common-subsequence overlap.
PrecisionRecall rouge_l(const Tokens& candidate, const Tokens& reference);
PrecisionRecall rouge_l(std::string_view candidate, std::string_view reference);

std::int64_t lcs_length(const Tokens& a, const Tokens& b);

/// Harmonic mean; 0 when both inputs are 0.
double f1_score(double precision, double recall);

}  // namespace adfg::evalmetrics
