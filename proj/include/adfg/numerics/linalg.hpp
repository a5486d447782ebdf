// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "adfg/numerics/tensor.hpp"

namespace adfg::numerics {

inline constexpr std::int64_t kDefaultBlockLimit = 64;
inline constexpr double kPivotFloor = 1e-12;

/// Solves a·x = rhs by Gaussian elimination with partial pivoting.
/// Throws ErrorKind::singularity (with a pivot-ratio condition estimate) when
/// a pivot falls below kPivotFloor, and ErrorKind::dimension when `a` is not
/// square, exceeds `block_limit`, or disagrees with `rhs`.
template <typename T>
Tensor<T> solve_small(const Tensor<T>& a, const Tensor<T>& rhs, std::int64_t block_limit = kDefaultBlockLimit);

/// (a ⊗ b)[i·r + i', j·s + j'] = a[i, j] · b[i', j'].
template <typename T>
Tensor<T> kron_values(const Tensor<T>& a, const Tensor<T>& b);

/// R = (I + S)(I - S)^-1. Orthogonal whenever S is skew-symmetric.
template <typename T>
Tensor<T> cayley_values(const Tensor<T>& s, std::int64_t block_limit = kDefaultBlockLimit);

/// S = U - Uᵀ.
template <typename T>
Tensor<T> skew_from(const Tensor<T>& u);

/// ‖RᵀR - I‖∞ (largest absolute entry).
template <typename T>
T orthogonality_error(const Tensor<T>& r);

}  // namespace adfg::numerics
