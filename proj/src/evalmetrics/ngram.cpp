// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/ngram.hpp"

#include <algorithm>

namespace adfg::evalmetrics {

NgramCounts ngram_counts(const Tokens& tokens, std::int32_t n) {
    NgramCounts out;
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
        ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
    }
    return out;
}

std::int64_t ngram_total(const Tokens& tokens, std::int32_t n) {
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(tokens.size()) - n + 1);
}

std::int64_t clipped_matches(const NgramCounts& candidate, const NgramCounts& reference) {
    std::int64_t hits = 0;
    for (const auto& [g, c] : candidate) {
        auto it = reference.find(g);
        if (it != reference.end()) hits += std::min(c, it->second);
    }
    return hits;
}

}  // namespace adfg::evalmetrics
