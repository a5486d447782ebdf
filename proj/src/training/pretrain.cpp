// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/training/pretrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "adfg/common/error.hpp"
#include "adfg/numerics/ops.hpp"
#include "adfg/training/schedule.hpp"

namespace adfg::training {

void PretrainConfig::validate() const {
    ADFG_REQUIRE(epochs >= 1, ErrorKind::config, "pretraining epochs must be at least 1");
    ADFG_REQUIRE(learning_rate > 0.0, ErrorKind::config, "pretraining learning rate must be positive");
    ADFG_REQUIRE(batch_size >= 1, ErrorKind::config, "pretraining batch size must be at least 1");
    ADFG_REQUIRE(context_window >= 2, ErrorKind::config, "pretraining window must hold at least two tokens");
    optimizer.validate();
}

PretrainReport pretrain(model::Transformer<float>& model, const std::vector<std::string>& texts,
                        const data::Tokenizer& tokenizer, const PretrainConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    ADFG_REQUIRE(config.context_window <= model.config().max_context, ErrorKind::config,
            "pretraining window exceeds the model's maximum context");
    ADFG_REQUIRE(tokenizer.vocab_size() <= model.config().vocab_size, ErrorKind::config,
            "tokenizer vocabulary is larger than the model's embedding table");

    std::vector<std::vector<std::int32_t>> chunks;
    const std::size_t limit =
        config.max_texts > 0 ? std::min(texts.size(), static_cast<std::size_t>(config.max_texts)) : texts.size();
    for (std::size_t t = 0; t < limit; ++t) {
        std::vector<std::int32_t> ids{data::Tokenizer::kBos};
        const auto body = tokenizer.encode(texts[t]);
        ids.insert(ids.end(), body.begin(), body.end());
        ids.push_back(data::Tokenizer::kEos);
        for (auto& c : make_overflow_chunks(ids, config.context_window)) {
            if (c.size() >= 2) chunks.push_back(std::move(c));
        }
    }
    ADFG_REQUIRE(!chunks.empty(), ErrorKind::data, "no text to pretrain on");

    PretrainReport report;
    report.chunks = static_cast<std::int64_t>(chunks.size());
    const auto batch = static_cast<std::size_t>(config.batch_size);
    const auto per_epoch = static_cast<std::int64_t>((chunks.size() + batch - 1) / batch);
    const std::int64_t total = per_epoch * config.epochs;
    Optimizer<float> opt(config.optimizer);
    std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + 5);
    std::vector<std::size_t> order(chunks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Tensor<float>*> params;
    for (auto& [name, t] : model.mutable_named_tensors()) params.push_back(t);

    for (std::int32_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sum = 0.0, count = 0.0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += batch) {
            const std::size_t b1 = std::min(order.size(), b0 + batch);
            float tokens = 0.0f;
            for (std::size_t i = b0; i < b1; ++i) tokens += static_cast<float>(chunks[order[i]].size() - 1);

            numerics::Graph<float> g;
            const model::BaseBinding base = model.bind(g, true);
            numerics::Var loss;
            for (std::size_t i = b0; i < b1; ++i) {
                const auto& c = chunks[order[i]];
                const std::span<const std::int32_t> all(c);
                const auto inputs = all.first(c.size() - 1);
                const auto targets = all.subspan(1);
                const std::vector<float> w(targets.size(), 1.0f);
                const numerics::Var logits = model.forward(g, inputs, nullptr, &base);
                const numerics::Var l = numerics::cross_entropy<float>(g, logits, targets, w, tokens);
                loss = loss.valid() ? numerics::add(g, loss, l) : l;
            }
            const double value = static_cast<double>(g.value(loss)[0]);
            ADFG_REQUIRE(std::isfinite(value), ErrorKind::numeric, "pretraining loss is not finite");
            g.backward(loss);
            std::vector<Tensor<float>> grads;
            for (numerics::Var v : base.all()) grads.push_back(g.grad(v));
            opt.step(params, grads, cosine_lr(report.steps, total, config.learning_rate));
            ++report.steps;
            sum += value * static_cast<double>(tokens);
            count += static_cast<double>(tokens);
        }
        report.epoch_loss.push_back(sum / count);
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace adfg::training
