// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "adfg/adapters/attach.hpp"
#include "adfg/data/corpus.hpp"
#include "adfg/data/prompt.hpp"
#include "adfg/data/tokenizer.hpp"
#include "adfg/evalmetrics/report.hpp"
#include "adfg/model/transformer.hpp"

namespace adfg::evalmetrics {

/// Extra per-example metric averaged into MetricReport::plugins.
class MetricPlugin {
public:
    virtual ~MetricPlugin() = default;
    virtual std::string name() const = 0;
    virtual bool higher_is_better() const { return true; }
    /// Must be safe to call from several threads at once.
    virtual double score(std::string_view candidate, std::string_view reference) const = 0;
};

/// Fixed-length text representation.
class TextEmbedder {
public:
    virtual ~TextEmbedder() = default;
    virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Mean-pooled final hidden states of a frozen model over the first
/// `max_tokens` tokens of the text.
class ModelEmbedder final : public TextEmbedder {
public:
    ModelEmbedder(const model::Transformer<float>& model, const data::Tokenizer& tokenizer,
                  std::int32_t max_tokens = 128);
    std::vector<double> embed(std::string_view text) const override;

private:
    const model::Transformer<float>* model_;
    const data::Tokenizer* tokenizer_;
    std::int32_t max_tokens_;
};

/// Cosine similarity; 0 when either vector is zero.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Stand-in for embedding-based similarity metrics: cosine of candidate and
/// reference embeddings. Reported as "contextual".
class ContextualProxy final : public MetricPlugin {
public:
    explicit ContextualProxy(const TextEmbedder& embedder) : embedder_(&embedder) {}
    std::string name() const override { return "contextual"; }
    double score(std::string_view candidate, std::string_view reference) const override;

private:
    const TextEmbedder* embedder_;
};

/// Worker count: `requested` when positive, else ADFG_THREADS, else 1;
/// capped at the hardware concurrency and at `work`.
std::int32_t thread_count(std::int32_t requested, std::size_t work);

struct ExampleOutcome {
    std::string id;
    std::string candidate;
    std::string reference;
    bool ok = false;
    std::string error;
    std::int64_t prompt_tokens = 0;
    bool truncated = false;
    /// Scored reference tokens and their summed negative log-likelihood.
    std::int64_t nll_tokens = 0;
    double nll_sum = 0.0;
};

struct Evaluation {
    MetricReport report;
    std::vector<ExampleOutcome> outcomes;
};

/// Averages per-example ROUGE F1, METEOR and plugin scores over successful
/// outcomes, corpus BLEU over the same set, and perplexity over every
/// scored reference token.
MetricReport score_outcomes(const std::string& system, const std::vector<ExampleOutcome>& outcomes,
                            const std::vector<const MetricPlugin*>& plugins = {});

/// Candidates copied from a callback; exceptions become per-example failures.
using CandidateFn = std::function<std::string(const data::Example&)>;
Evaluation evaluate_candidates(const std::string& system, const data::Corpus& corpus, const CandidateFn& candidate,
                               const std::vector<const MetricPlugin*>& plugins = {}, std::int32_t threads = 0);

struct GenerationConfig {
    std::int32_t max_new_tokens = 48;
    /// Exemplars per prompt, drawn from `shot_pool` (which must not be a holdout split).
    std::int32_t k = 0;
    const data::Corpus* shot_pool = nullptr;
    std::uint64_t seed = 0;
    bool perplexity = true;
    std::int32_t threads = 0;
};

/// The prompt for one example, left-truncated (after [BOS]) so that
/// `reserve` tokens of context remain.
std::vector<std::int32_t> prompt_tokens(const data::Tokenizer& tokenizer, const data::PromptSpec& prompt,
                                        const data::Example& example, const std::vector<data::Example>& shots,
                                        std::int32_t max_context, std::int32_t reserve, bool* truncated = nullptr);

/// Greedy generation for every example with the composite attached (empty
/// composite = frozen base), then metric averaging.
Evaluation evaluate_corpus(const model::Transformer<float>& model, const adapters::Composite<float>& composite,
                           const data::Corpus& corpus, const data::PromptSpec& prompt,
                           const data::Tokenizer& tokenizer, const GenerationConfig& config,
                           const std::string& system, const std::vector<const MetricPlugin*>& plugins = {});

}  // namespace adfg::evalmetrics
