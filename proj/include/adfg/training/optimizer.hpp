// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adfg/numerics/tensor.hpp"

namespace adfg::training {

using numerics::Tensor;

enum class OptimizerKind : std::uint8_t { sgd, adamw };

std::string_view to_string(OptimizerKind k);
std::optional<OptimizerKind> parse_optimizer(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::sgd;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    /// Decoupled: p ← p − lr·wd·p before the gradient step.
    double weight_decay = 0.0;
    /// Global L2 gradient-norm cap; 0 disables clipping.
    double clip_norm = 0.0;

    void validate() const;
    /// One-line description recorded in every training report.
    std::string describe() const;
};

/// Updates an ordered list of parameter tensors in place. The list (and the
/// shapes in it) must stay the same across calls; moment buffers are keyed
/// by position.
template <typename T>
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    void step(const std::vector<Tensor<T>*>& params, const std::vector<Tensor<T>>& grads, double lr);

    std::int64_t steps() const noexcept { return steps_; }
    const OptimizerConfig& config() const noexcept { return config_; }
    /// Norm of the last gradient before clipping.
    double last_grad_norm() const noexcept { return last_norm_; }

private:
    OptimizerConfig config_;
    std::int64_t steps_ = 0;
    double last_norm_ = 0.0;
    std::vector<Tensor<T>> m_, v_;
};

extern template class Optimizer<float>;
extern template class Optimizer<double>;

}  // namespace adfg::training
