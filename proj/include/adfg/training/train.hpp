// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adfg/adapters/param_count.hpp"
#include "adfg/adapters/state.hpp"
#include "adfg/data/corpus.hpp"
#include "adfg/data/prompt.hpp"
#include "adfg/data/tokenizer.hpp"
#include "adfg/model/transformer.hpp"
#include "adfg/training/optimizer.hpp"

namespace adfg::training {

enum class OverflowPolicy : std::uint8_t { split, truncate };

std::string_view to_string(OverflowPolicy p);
std::optional<OverflowPolicy> parse_overflow(std::string_view name);

struct TrainConfig {
    std::int32_t epochs = 5;
    double learning_rate = 5e-4;
    std::int32_t batch_size = 4;
    std::int64_t max_train_samples = 200;
    std::int64_t max_val_samples = 50;
    std::int32_t context_window = 256;
    OverflowPolicy overflow = OverflowPolicy::split;
    std::int32_t overflow_overlap = 0;
    std::uint64_t seed = 0;
    OptimizerConfig optimizer;

    /// Values of the reference runs (1000/500 samples, 4096-token context).
    static TrainConfig reference();
    /// CPU-scale defaults.
    static TrainConfig desk() { return {}; }

    void validate() const;
};

/// One tokenized training sequence: [BOS] prompt " " summary [EOS], with a
/// loss weight per token (1 on summary and EOS tokens, 0 elsewhere).
struct FormattedSequence {
    std::vector<std::int32_t> tokens;
    std::vector<float> loss_mask;
    std::int64_t prompt_tokens = 0;
};

FormattedSequence format_sequence(const data::Tokenizer& tokenizer, const data::PromptSpec& prompt,
                                  const data::Example& example);

/// Model inputs with next-token targets and weights, at most the context window long.
struct TrainChunk {
    std::vector<std::int32_t> inputs;
    std::vector<std::int32_t> targets;
    std::vector<float> weights;
    double weight_sum() const;
};

struct ChunkSet {
    std::vector<TrainChunk> chunks;
    std::int64_t sequences = 0;
    std::int64_t overlong = 0;
    /// Chunks left without a single summary token and dropped.
    std::int64_t dropped = 0;
};

/// Formats, applies the overflow policy and keeps only chunks that carry loss.
ChunkSet make_chunks(const data::Tokenizer& tokenizer, const data::PromptSpec& prompt, const data::Corpus& corpus,
                     const TrainConfig& config);

struct EpochRecord {
    std::int32_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_ppl = 0.0;
};

struct TrainReport {
    std::string method;
    std::string dataset;
    std::string domain;
    std::vector<EpochRecord> epochs;
    std::int32_t best_epoch = 0;
    double wall_seconds = 0.0;
    adapters::ParamCount params;
    std::string optimizer_note;
    std::uint64_t base_hash_before = 0;
    std::uint64_t base_hash_after = 0;
    /// adalora: active budget after every optimizer step.
    std::vector<std::int64_t> budget_trace;
    std::int64_t steps = 0;
    std::int64_t train_chunks = 0;
    std::int64_t val_chunks = 0;
    std::int64_t dropped_chunks = 0;
    std::string train_selection;
    std::string val_selection;

    double best_val_loss() const;
};

struct TrainResult {
    adapters::AdapterState<float> state;
    TrainReport report;
};

/// Called after every epoch, e.g. for progress output.
using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains one adapter on `train` against the frozen `model` and returns the
/// state with the lowest validation loss. Only adapter parameters change.
/// Holdout corpora are rejected with ErrorKind::isolation.
TrainResult train_adapter(const model::Transformer<float>& model, const adapters::AdapterConfig& adapter,
                          const data::Corpus& train, const data::Corpus& validation, const data::PromptSpec& prompt,
                          const data::Tokenizer& tokenizer, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

/// Token-weighted mean loss of `chunks` under `state` with dropout off.
double evaluate_loss(const model::Transformer<float>& model, const adapters::AdapterState<float>* state,
                     const std::vector<TrainChunk>& chunks);

/// Human-readable report; the first line names the optimizer settings.
std::string report_text(const TrainReport& report);
/// One JSON object per epoch: epoch, train_loss, val_loss, val_ppl.
std::string report_records(const TrainReport& report);

}  // namespace adfg::training
