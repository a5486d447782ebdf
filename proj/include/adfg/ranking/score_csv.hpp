// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "adfg/ranking/borda.hpp"

namespace adfg::ranking {

/// Header row "candidate,<metric>+,<metric>-,..." (suffix = orientation, +
/// when omitted), then one row per candidate. Lines starting with '#' are
/// comments.
ScoreMatrix parse_score_csv(std::string_view text);
std::string score_csv(const ScoreMatrix& scores);

/// "candidate,points+,rank-" rows in rank order, tie notes as trailing comments.
std::string rank_csv(const RankTable& table);
RankTable parse_rank_csv(std::string_view text);

}  // namespace adfg::ranking
