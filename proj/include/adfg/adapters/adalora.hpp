// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "adfg/adapters/state.hpp"

namespace adfg::adapters {

/// Active triplet budget at `step` of `total_steps`: b_init until the warmup
/// fraction, then a cubic decay to b_final, which is held for the final
/// fraction of the run and at step == total_steps.
std::int64_t adalora_budget(const AdapterConfig& config, const ModelConfig& model, std::int64_t step,
                            std::int64_t total_steps);

/// One bookkeeping step after gradients are known and before the optimizer
/// update:
///  - refreshes the smoothed sensitivity Ī and uncertainty Ū of every P, Λ
///    and Q entry from |θ·∂L/∂θ|;
///  - recomputes the mask over all (P column, Λ entry, Q row) triplets so
///    exactly the scheduled budget of highest-scoring triplets stays active;
///  - adds γ·∇(‖PᵀP − I‖²_F + ‖QQᵀ − I‖²_F) to the P and Q gradients.
template <typename T>
void adalora_step(AdapterState<T>& state, SiteMap<T>& gradients, std::int64_t step, std::int64_t total_steps);

/// Per-triplet importance score Σ over the triplet of Ī·Ū (P and Q averaged over their entries).
template <typename T>
Tensor<T> adalora_scores(const AdapterState<T>& state, const SiteId& site);

/// Number of active triplets across all sites.
template <typename T>
std::int64_t adalora_active(const AdapterState<T>& state);

}  // namespace adfg::adapters
