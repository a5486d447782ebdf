// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "adfg/evalmetrics/tokenize.hpp"

namespace adfg::evalmetrics {

struct MeteorDetail {
    double score = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_mean = 0.0;
    double penalty = 0.0;
    std::int64_t matches = 0;
    std::int64_t exact_matches = 0;
    std::int64_t chunks = 0;
    /// (candidate index, reference index) pairs of the chosen alignment.
    std::vector<std::pair<std::int32_t, std::int32_t>> alignment;
};

/// Unigram alignment where a pair matches exactly or by equal light_stem.
/// Among all one-to-one alignments the chosen one maximizes exact matches,
/// then total matches, then minimizes chunks (maximal runs contiguous in
/// both texts). Found by a beam over candidate positions that merges states
/// with the same used-reference set; exact whenever the beam never fills.
MeteorDetail meteor_detail(const Tokens& candidate, const Tokens& reference);
MeteorDetail meteor_detail(std::string_view candidate, std::string_view reference);

/// F_mean · (1 − 0.5 · (chunks / matches)³) with F_mean = 10PR / (R + 9P).
double meteor(std::string_view candidate, std::string_view reference);

inline constexpr std::size_t kMeteorBeam = 2048;

}  // namespace adfg::evalmetrics
