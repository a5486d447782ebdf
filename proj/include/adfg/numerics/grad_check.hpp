// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "adfg/numerics/graph.hpp"

namespace adfg::numerics {

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::int64_t parameter_count_checked = 0;
    bool pass = false;
};

struct GradCheckOptions {
    double epsilon = 1e-6;
    double tolerance = 1e-5;
    /// Entries checked per parameter tensor; 0 checks every entry. When
    /// sampling, entries are drawn with a seeded generator.
    std::int64_t max_entries_per_tensor = 0;
    std::uint64_t seed = 0;
};

/// Builds a scalar on a fresh graph from leaf variables bound to `params`
/// (same order) and returns it.
using ScalarFunction = std::function<Var(Graph<double>&, std::span<const Var>)>;

/// Central finite differences against reverse-mode gradients. Relative error
/// per entry is |g_ad − g_fd| / max(1e-8, |g_ad| + |g_fd|). The tensors in
/// `params` are perturbed in place and restored before returning.
GradCheckReport grad_check(const ScalarFunction& f, std::span<Tensor<double>* const> params,
                           const GradCheckOptions& options = {});

}  // namespace adfg::numerics
