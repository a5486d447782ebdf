// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/training/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "adfg/adapters/adalora.hpp"
#include "adfg/adapters/attach.hpp"
#include "adfg/common/error.hpp"
#include "adfg/numerics/ops.hpp"
#include "adfg/training/schedule.hpp"

namespace adfg::training {

using adapters::AdapterState;
using adapters::BoundComposite;
using numerics::Graph;
using numerics::Var;

std::string_view to_string(OverflowPolicy p) {
    return p == OverflowPolicy::split ? "split" : "truncate";
}

std::optional<OverflowPolicy> parse_overflow(std::string_view name) {
    if (name == "split") return OverflowPolicy::split;
    if (name == "truncate") return OverflowPolicy::truncate;
    return std::nullopt;
}

TrainConfig TrainConfig::reference() {
    TrainConfig c;
    c.max_train_samples = 1000;
    c.max_val_samples = 500;
    c.context_window = 4096;
    return c;
}

void TrainConfig::validate() const {
    ADFG_REQUIRE(epochs >= 1, ErrorKind::config, "epochs must be at least 1");
    ADFG_REQUIRE(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::config,
            "learning rate must be finite and non-negative");
    ADFG_REQUIRE(batch_size >= 1, ErrorKind::config, "batch size must be at least 1");
    ADFG_REQUIRE(context_window >= 2, ErrorKind::config, "context window must hold at least two tokens");
    ADFG_REQUIRE(overflow_overlap >= 0 && overflow_overlap < context_window, ErrorKind::config,
            "overflow overlap must lie in [0, context window)");
    optimizer.validate();
}

double TrainChunk::weight_sum() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double TrainReport::best_val_loss() const {
    for (const EpochRecord& e : epochs) {
        if (e.epoch == best_epoch) return e.val_loss;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

FormattedSequence format_sequence(const data::Tokenizer& tokenizer, const data::PromptSpec& prompt,
                                  const data::Example& example) {
    data::PromptSpec zero = prompt;
    zero.k = 0;
    FormattedSequence s;
    s.tokens.push_back(data::Tokenizer::kBos);
    const auto head = tokenizer.encode(data::build_prompt(zero, example.article, {}));
    s.tokens.insert(s.tokens.end(), head.begin(), head.end());
    s.prompt_tokens = static_cast<std::int64_t>(s.tokens.size());
    const auto tail = tokenizer.encode(" " + example.summary);
    s.tokens.insert(s.tokens.end(), tail.begin(), tail.end());
    s.tokens.push_back(data::Tokenizer::kEos);
    s.loss_mask.assign(s.tokens.size(), 0.0f);
    std::fill(s.loss_mask.begin() + s.prompt_tokens, s.loss_mask.end(), 1.0f);
    return s;
}

ChunkSet make_chunks(const data::Tokenizer& tokenizer, const data::PromptSpec& prompt, const data::Corpus& corpus,
                     const TrainConfig& config) {
    ChunkSet out;
    const std::int64_t window = config.context_window;
    for (const data::Example& e : corpus.examples()) {
        const FormattedSequence s = format_sequence(tokenizer, prompt, e);
        ++out.sequences;
        const auto n = static_cast<std::int64_t>(s.tokens.size());
        std::vector<std::int64_t> starts{0};
        if (n > window) {
            ++out.overlong;
            if (config.overflow == OverflowPolicy::split) {
                starts = overflow_chunk_starts(n, window, config.overflow_overlap);
            }
        }
        for (std::int64_t st : starts) {
            const std::int64_t en = std::min(n, st + window);
            TrainChunk c;
            // the first `overlap` targets of a continuation chunk were already scored by its predecessor
            const std::int64_t fresh = st == 0 ? 0 : st + config.overflow_overlap;
            for (std::int64_t i = st; i + 1 < en; ++i) {
                c.inputs.push_back(s.tokens[static_cast<std::size_t>(i)]);
                c.targets.push_back(s.tokens[static_cast<std::size_t>(i + 1)]);
                c.weights.push_back(i + 1 >= fresh ? s.loss_mask[static_cast<std::size_t>(i + 1)] : 0.0f);
            }
            if (c.weight_sum() > 0.0) {
                out.chunks.push_back(std::move(c));
            } else {
                ++out.dropped;
            }
        }
    }
    return out;
}

double evaluate_loss(const model::Transformer<float>& model, const AdapterState<float>* state,
                     const std::vector<TrainChunk>& chunks) {
    adapters::Composite<float> composite;
    if (state != nullptr) composite = adapters::compose<float>({state});
    double total = 0.0, weight = 0.0;
    for (const TrainChunk& c : chunks) {
        Graph<float> g;
        BoundComposite<float> bound(g, composite, model.config());
        const Var logits = model.forward(g, c.inputs, composite.empty() ? nullptr : &bound);
        const Var loss = numerics::cross_entropy<float>(g, logits, c.targets, c.weights, 1.0f);
        total += static_cast<double>(g.value(loss)[0]);
        weight += c.weight_sum();
    }
    ADFG_REQUIRE(weight > 0.0, ErrorKind::data, "no scored tokens to evaluate");
    return total / weight;
}

TrainResult train_adapter(const model::Transformer<float>& model, const adapters::AdapterConfig& adapter,
                          const data::Corpus& train, const data::Corpus& validation, const data::PromptSpec& prompt,
                          const data::Tokenizer& tokenizer, const TrainConfig& config, const EpochCallback& on_epoch) {
    const auto started = std::chrono::steady_clock::now();
    config.validate();
    adapter.validate(model.config());
    data::require_not_holdout(train, "training");
    data::require_not_holdout(validation, "checkpoint selection");
    ADFG_REQUIRE(!train.empty(), ErrorKind::data, "training corpus is empty");
    ADFG_REQUIRE(!validation.empty(), ErrorKind::data, "validation corpus is empty");
    ADFG_REQUIRE(!prompt.instruction.empty(), ErrorKind::input, "domain prompt is empty");
    ADFG_REQUIRE(config.context_window <= model.config().max_context, ErrorKind::config,
            "context window exceeds the model's maximum context");
    ADFG_REQUIRE(tokenizer.vocab_size() <= model.config().vocab_size, ErrorKind::config,
            "tokenizer vocabulary is larger than the model's embedding table");

    const data::Corpus train_sel = train.select(config.max_train_samples, config.seed);
    const data::Corpus val_sel = validation.select(config.max_val_samples, config.seed + 1);
    const ChunkSet train_set = make_chunks(tokenizer, prompt, train_sel, config);
    const ChunkSet val_set = make_chunks(tokenizer, prompt, val_sel, config);
    ADFG_REQUIRE(!train_set.chunks.empty(), ErrorKind::data,
            "no training sequence keeps a summary token under the '" + std::string(to_string(config.overflow)) +
                "' overflow policy");
    ADFG_REQUIRE(!val_set.chunks.empty(), ErrorKind::data,
            "no validation sequence keeps a summary token under the '" + std::string(to_string(config.overflow)) +
                "' overflow policy");

    TrainResult result;
    TrainReport& report = result.report;
    report.method = std::string(adapters::to_string(adapter.method));
    report.dataset = train.dataset();
    report.domain = train.domain().empty() ? prompt.domain : train.domain();
    report.params = adapters::trainable_param_count(adapter, model.config());
    report.optimizer_note = config.optimizer.describe();
    report.base_hash_before = model.parameter_hash();
    report.train_chunks = static_cast<std::int64_t>(train_set.chunks.size());
    report.val_chunks = static_cast<std::int64_t>(val_set.chunks.size());
    report.dropped_chunks = train_set.dropped + val_set.dropped;
    report.train_selection = train_sel.selection_note();
    report.val_selection = val_sel.selection_note();

    AdapterState<float> state = adapters::init_adapter<float>(adapter, model.config(), config.seed);
    state.provenance = {report.dataset, report.domain,
                        report.method + "@" + report.dataset + "#" + std::to_string(config.seed)};
    const bool adalora = adapter.method == adapters::Method::adalora;

    const auto n_chunks = train_set.chunks.size();
    const auto batch = static_cast<std::size_t>(config.batch_size);
    const auto per_epoch = static_cast<std::int64_t>((n_chunks + batch - 1) / batch);
    const std::int64_t total_steps = per_epoch * config.epochs;

    Optimizer<float> opt(config.optimizer);
    std::mt19937_64 order_rng(config.seed * 0x9E3779B97F4A7C15ULL + 11);
    std::mt19937_64 drop_rng(config.seed * 0x9E3779B97F4A7C15ULL + 23);
    std::vector<std::size_t> order(n_chunks);
    std::iota(order.begin(), order.end(), std::size_t{0});

    AdapterState<float> best = state;
    double best_loss = std::numeric_limits<double>::infinity();
    std::int64_t step = 0;

    for (std::int32_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), order_rng);
        double epoch_loss = 0.0, epoch_weight = 0.0;
        for (std::size_t b0 = 0; b0 < n_chunks; b0 += batch) {
            const std::size_t b1 = std::min(n_chunks, b0 + batch);
            double batch_weight = 0.0;
            for (std::size_t i = b0; i < b1; ++i) batch_weight += train_set.chunks[order[i]].weight_sum();

            Graph<float> g;
            const adapters::Composite<float> composite = adapters::compose<float>({&state});
            BoundComposite<float> bound(g, composite, model.config(), {true, 0}, &drop_rng);
            Var loss;
            for (std::size_t i = b0; i < b1; ++i) {
                const TrainChunk& c = train_set.chunks[order[i]];
                const Var logits = model.forward(g, c.inputs, &bound);
                const Var l = numerics::cross_entropy<float>(g, logits, c.targets, c.weights,
                                                             static_cast<float>(batch_weight));
                loss = loss.valid() ? numerics::add(g, loss, l) : l;
            }
            const double loss_value = static_cast<double>(g.value(loss)[0]);
            ADFG_REQUIRE(std::isfinite(loss_value), ErrorKind::numeric, "training loss is not finite");
            g.backward(loss);

            adapters::SiteMap<float> grads;
            for (const auto& [site, named] : bound.vars(0)) {
                for (const auto& [name, v] : named) {
                    if (adapters::is_trainable_name(name)) grads[site][name] = g.grad(v);
                }
            }
            if (adalora) {
                adapters::adalora_step(state, grads, step + 1, total_steps);
                report.budget_trace.push_back(state.adalora_budget);
            } else {
                ++state.steps_taken;
            }
            std::vector<Tensor<float>*> params;
            std::vector<Tensor<float>> flat;
            for (auto& [site, named] : grads) {
                for (auto& [name, gr] : named) {
                    params.push_back(&state.sites.at(site).at(name));
                    flat.push_back(std::move(gr));
                }
            }
            opt.step(params, flat, cosine_lr(step, total_steps, config.learning_rate));
            ++step;
            epoch_loss += loss_value * batch_weight;
            epoch_weight += batch_weight;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / epoch_weight;
        rec.val_loss = evaluate_loss(model, &state, val_set.chunks);
        rec.val_ppl = std::exp(rec.val_loss);
        report.epochs.push_back(rec);
        if (rec.val_loss < best_loss) {
            best_loss = rec.val_loss;
            best = state;
            report.best_epoch = epoch;
        }
        if (on_epoch) on_epoch(rec);
    }

    report.steps = step;
    report.base_hash_after = model.parameter_hash();
    ADFG_REQUIRE(report.base_hash_after == report.base_hash_before, ErrorKind::numeric,
            "base model weights changed during adapter training");
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.state = std::move(best);
    return result;
}

}  // namespace adfg::training
