// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "adfg/evalmetrics/tokenize.hpp"

namespace adfg::evalmetrics {

using NgramCounts = std::map<std::vector<std::string>, std::int64_t>;

NgramCounts ngram_counts(const Tokens& tokens, std::int32_t n);
/// Number of n-gram positions, max(0, |tokens| − n + 1).
std::int64_t ngram_total(const Tokens& tokens, std::int32_t n);
/// Σ min(candidate count, reference count).
std::int64_t clipped_matches(const NgramCounts& candidate, const NgramCounts& reference);

}  // namespace adfg::evalmetrics
