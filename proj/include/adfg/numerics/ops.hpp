// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

// Gradient-tracked operations. Every op reads its inputs from the graph,
// appends one node and, when an input requires a gradient, records the
// matching backward closure. Scalars are tensors of shape {1}.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adfg/numerics/graph.hpp"

namespace adfg::numerics {

template <typename T> Var add(Graph<T>& g, Var a, Var b);
template <typename T> Var sub(Graph<T>& g, Var a, Var b);
template <typename T> Var scale(Graph<T>& g, Var a, T factor);
/// Elementwise (Hadamard) product; shapes must match exactly.
template <typename T> Var hadamard(Graph<T>& g, Var a, Var b);
template <typename T> Var sum(Graph<T>& g, Var a);
template <typename T> Var transpose(Graph<T>& g, Var a);

template <typename T> Var matmul(Graph<T>& g, Var a, Var b);
/// x·Wᵀ for x [n×d_in] and W [d_out×d_in].
template <typename T> Var linear(Graph<T>& g, Var x, Var w);
template <typename T> Var kron(Graph<T>& g, Var a, Var b);

/// y[i, j] = x[i, j] · v[j].
template <typename T> Var scale_cols(Graph<T>& g, Var x, Var v);

/// Row-wise softmax with the row maximum subtracted first.
template <typename T> Var softmax_rows(Graph<T>& g, Var a);
template <typename T> Var silu(Graph<T>& g, Var a);
template <typename T> Var rms_norm(Graph<T>& g, Var x, Var gain, T eps);
template <typename T> Var embedding(Graph<T>& g, Var table, std::span<const std::int32_t> ids);

/// Σ_i w_i · (−log softmax(logits_i)[target_i]) / normalizer. Positions with
/// zero weight contribute neither loss nor gradient.
template <typename T>
Var cross_entropy(Graph<T>& g, Var logits, std::span<const std::int32_t> targets, std::span<const T> weights,
                  T normalizer);

/// Rotary position encoding over [n × heads·d_head], rotating the two halves
/// of each head by position-dependent angles.
template <typename T>
Var rope(Graph<T>& g, Var x, std::int64_t n_heads, std::int64_t d_head, double theta);

/// Causal grouped-query attention. q is [n × H·d], k and v are [n × G·d],
/// query head h reads key/value head h / (H / G).
template <typename T>
Var causal_attention(Graph<T>& g, Var q, Var k, Var v, std::int64_t n_heads, std::int64_t n_kv_heads);

/// Cayley transform (I + S)(I − S)⁻¹ of a square matrix.
template <typename T> Var cayley(Graph<T>& g, Var s);
/// Block-diagonal matrix from square blocks.
template <typename T> Var block_diag(Graph<T>& g, const std::vector<Var>& blocks);

}  // namespace adfg::numerics
