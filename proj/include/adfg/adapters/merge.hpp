// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "adfg/adapters/attach.hpp"
#include "adfg/model/transformer.hpp"

namespace adfg::adapters {

/// Folds an adapter into a copy of the base weights: W + Δ for delta
/// methods, diag(l)·W for ia3 on q/k/v/o and R·W for oft. ia3 on the FFN
/// activation has no projection to fold into and raises unsupported_merge.
template <typename T>
model::Transformer<T> merge_into_base(const model::Transformer<T>& base, const AdapterState<T>& state);

/// Same for a whole composite, in the order the attached forward applies it.
template <typename T>
model::Transformer<T> merge_into_base(const model::Transformer<T>& base, const Composite<T>& composite);

}  // namespace adfg::adapters
