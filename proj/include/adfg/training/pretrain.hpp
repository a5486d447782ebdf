// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adfg/data/tokenizer.hpp"
#include "adfg/model/transformer.hpp"
#include "adfg/training/optimizer.hpp"

namespace adfg::training {

/// Full-parameter language-model training of the desk base on raw text.
struct PretrainConfig {
    std::int32_t epochs = 2;
    double learning_rate = 3e-3;
    std::int32_t batch_size = 8;
    std::int32_t context_window = 128;
    std::uint64_t seed = 0;
    /// 0 trains on every text.
    std::int64_t max_texts = 0;
    OptimizerConfig optimizer{OptimizerKind::adamw};

    void validate() const;
};

struct PretrainReport {
    std::vector<double> epoch_loss;
    std::int64_t steps = 0;
    std::int64_t chunks = 0;
    double wall_seconds = 0.0;
};

/// Each text becomes [BOS] tokens [EOS], split into context windows.
PretrainReport pretrain(model::Transformer<float>& model, const std::vector<std::string>& texts,
                        const data::Tokenizer& tokenizer, const PretrainConfig& config);

}  // namespace adfg::training
