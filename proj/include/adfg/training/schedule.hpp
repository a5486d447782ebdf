// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace adfg::training {

/// lr0 · ½(1 + cos(π · step / total_steps)). total_steps = 0 is a config error.
double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr0);

/// Consecutive windows of at most `window` tokens covering `tokens`. Each
/// window after the first starts `overlap` tokens before the previous one
/// ended. Requires window ≥ 2 and 0 ≤ overlap < window.
std::vector<std::vector<std::int32_t>> make_overflow_chunks(std::span<const std::int32_t> tokens,
                                                            std::int64_t window, std::int64_t overlap = 0);

/// Start offset of every chunk make_overflow_chunks would return.
std::vector<std::int64_t> overflow_chunk_starts(std::int64_t length, std::int64_t window, std::int64_t overlap = 0);

}  // namespace adfg::training
