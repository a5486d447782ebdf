// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "adfg/adapters/config.hpp"

namespace adfg::adapters {

struct ParamCount {
    std::int64_t trainable = 0;
    std::int64_t base = 0;
    /// 100 · trainable / (base + trainable): the share of all parameters in
    /// the adapted model that are trainable.
    double percent = 0.0;
};

/// Closed-form count of trainable scalars; agrees with init_adapter's tensors.
ParamCount trainable_param_count(const AdapterConfig& config, const ModelConfig& model);

/// Trainable scalars at one site.
std::int64_t site_param_count(const AdapterConfig& config, const ModelConfig& model, Projection p);

}  // namespace adfg::adapters
