// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/training/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "adfg/common/error.hpp"

namespace adfg::training {

double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0) {
    ADFG_REQUIRE(total_steps > 0, ErrorKind::config, "cosine schedule needs at least one step");
    ADFG_REQUIRE(step >= 0 && step <= total_steps, ErrorKind::config,
            "schedule step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
    const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

std::vector<std::int64_t> overflow_chunk_starts(std::int64_t length, std::int64_t window, std::int64_t overlap) {
    ADFG_REQUIRE(window >= 2, ErrorKind::config, "overflow window must hold at least two tokens");
    ADFG_REQUIRE(overlap >= 0 && overlap < window, ErrorKind::config, "overflow overlap must lie in [0, window)");
    std::vector<std::int64_t> starts;
    if (length <= 0) return starts;
    for (std::int64_t s = 0;; s += window - overlap) {
        starts.push_back(s);
        if (s + window >= length) break;
    }
    return starts;
}

std::vector<std::vector<std::int32_t>> make_overflow_chunks(std::span<const std::int32_t> tokens,
                                                            std::int64_t window, std::int64_t overlap) {
    const auto n = static_cast<std::int64_t>(tokens.size());
    std::vector<std::vector<std::int32_t>> out;
    for (std::int64_t s : overflow_chunk_starts(n, window, overlap)) {
        const std::int64_t e = std::min(n, s + window);
        out.emplace_back(tokens.begin() + s, tokens.begin() + e);
    }
    return out;
}

}  // namespace adfg::training
