// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"
#include "adfg/evalmetrics/bleu.hpp"
#include "adfg/evalmetrics/meteor.hpp"
#include "adfg/evalmetrics/rouge.hpp"

namespace adfg::evalmetrics {

ModelEmbedder::ModelEmbedder(const model::Transformer<float>& model, const data::Tokenizer& tokenizer,
                             std::int32_t max_tokens)
    : model_(&model), tokenizer_(&tokenizer), max_tokens_(std::min(max_tokens, model.config().max_context)) {
    ADFG_REQUIRE(max_tokens_ >= 1, ErrorKind::config, "embedder needs at least one token");
}

std::vector<double> ModelEmbedder::embed(std::string_view text) const {
    std::vector<std::int32_t> ids{data::Tokenizer::kBos};
    const auto body = tokenizer_->encode(text);
    ids.insert(ids.end(), body.begin(), body.end());
    if (ids.size() > static_cast<std::size_t>(max_tokens_)) ids.resize(static_cast<std::size_t>(max_tokens_));
    numerics::Graph<float> g;
    const auto& h = g.value(model_->hidden(g, ids, nullptr));
    std::vector<double> out(static_cast<std::size_t>(h.cols()), 0.0);
    for (std::int64_t i = 0; i < h.rows(); ++i) {
        for (std::int64_t j = 0; j < h.cols(); ++j) out[static_cast<std::size_t>(j)] += h(i, j);
    }
    for (double& v : out) v /= static_cast<double>(h.rows());
    return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    ADFG_REQUIRE(a.size() == b.size(), ErrorKind::dimension, "cosine: vector lengths differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

double ContextualProxy::score(std::string_view candidate, std::string_view reference) const {
    if (candidate.empty() || reference.empty()) return 0.0;
    return cosine(embedder_->embed(candidate), embedder_->embed(reference));
}

std::int32_t thread_count(std::int32_t requested, std::size_t work) {
    std::int64_t n = requested;
    if (n <= 0) {
        n = 1;
        if (const char* env = std::getenv("ADFG_THREADS")) {
            try {
                n = std::max<std::int64_t>(1, std::stoll(env));
            } catch (const std::exception&) {
                fail(ErrorKind::config, std::string("ADFG_THREADS is not a number: ") + env);
            }
        }
    }
    const auto hw = static_cast<std::int64_t>(std::max(1U, std::thread::hardware_concurrency()));
    n = std::min({n, hw, static_cast<std::int64_t>(std::max<std::size_t>(work, 1))});
    return static_cast<std::int32_t>(n);
}

namespace {

/// Runs job(i) for i in [0, n) on `threads` workers with a fixed striding so
/// results land in per-index slots regardless of scheduling.
template <typename Job>
void parallel_for(std::size_t n, std::int32_t threads, const Job& job) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i, 0);
        return;
    }
    std::vector<std::thread> pool;
    for (std::int32_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < n; i += static_cast<std::size_t>(threads)) job(i, t);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

MetricReport score_outcomes(const std::string& system, const std::vector<ExampleOutcome>& outcomes,
                            const std::vector<const MetricPlugin*>& plugins) {
    MetricReport r;
    r.system = system;
    std::vector<std::string> cands, refs;
    std::int64_t nll_tokens = 0;
    double nll = 0.0;
    for (const ExampleOutcome& o : outcomes) {
        nll_tokens += o.nll_tokens;
        nll += o.nll_sum;
        if (!o.ok) {
            ++r.failures;
            continue;
        }
        const Tokens c = metric_tokens(o.candidate), ref = metric_tokens(o.reference);
        r.rouge1 += rouge_n(c, ref, 1).f1;
        r.rouge2 += rouge_n(c, ref, 2).f1;
        r.rougeL += rouge_l(c, ref).f1;
        r.meteor += meteor_detail(c, ref).score;
        for (const MetricPlugin* p : plugins) r.plugins[p->name()] += p->score(o.candidate, o.reference);
        cands.push_back(o.candidate);
        refs.push_back(o.reference);
    }
    r.examples = static_cast<std::int64_t>(cands.size());
    for (const MetricPlugin* p : plugins) {
        r.plugins.try_emplace(p->name(), 0.0);
        if (!p->higher_is_better()) r.plugin_orientation[p->name()] = false;
    }
    if (r.examples > 0) {
        const auto n = static_cast<double>(r.examples);
        r.rouge1 /= n;
        r.rouge2 /= n;
        r.rougeL /= n;
        r.meteor /= n;
        for (auto& [k, v] : r.plugins) v /= n;
        r.bleu = bleu(cands, refs);
    }
    r.rouge_geo = rouge_geo(r.rouge1, r.rouge2, r.rougeL);
    if (nll_tokens > 0) r.perplexity = std::exp(nll / static_cast<double>(nll_tokens));
    return r;
}

Evaluation evaluate_candidates(const std::string& system, const data::Corpus& corpus, const CandidateFn& candidate,
                               const std::vector<const MetricPlugin*>& plugins, std::int32_t threads) {
    ADFG_REQUIRE(!corpus.empty(), ErrorKind::data, "evaluation corpus is empty");
    Evaluation ev;
    ev.outcomes.resize(corpus.size());
    parallel_for(corpus.size(), thread_count(threads, corpus.size()), [&](std::size_t i, std::int32_t) {
        const data::Example& e = corpus[i];
        ExampleOutcome& o = ev.outcomes[i];
        o.id = e.id;
        o.reference = e.summary;
        try {
            o.candidate = candidate(e);
            o.ok = true;
        } catch (const std::exception& ex) {
            o.error = ex.what();
        }
    });
    ev.report = score_outcomes(system, ev.outcomes, plugins);
    return ev;
}

std::vector<std::int32_t> prompt_tokens(const data::Tokenizer& tokenizer, const data::PromptSpec& prompt,
                                        const data::Example& example, const std::vector<data::Example>& shots,
                                        std::int32_t max_context, std::int32_t reserve, bool* truncated) {
    const auto body = tokenizer.encode(data::build_prompt(prompt, example.article, shots));
    const auto room = static_cast<std::size_t>(std::max(1, max_context - reserve - 1));
    std::vector<std::int32_t> ids{data::Tokenizer::kBos};
    const bool cut = body.size() > room;
    ids.insert(ids.end(), cut ? body.end() - static_cast<std::ptrdiff_t>(room) : body.begin(), body.end());
    if (truncated != nullptr) *truncated = cut;
    return ids;
}

Evaluation evaluate_corpus(const model::Transformer<float>& model, const adapters::Composite<float>& composite,
                           const data::Corpus& corpus, const data::PromptSpec& prompt,
                           const data::Tokenizer& tokenizer, const GenerationConfig& config,
                           const std::string& system, const std::vector<const MetricPlugin*>& plugins) {
    ADFG_REQUIRE(!corpus.empty(), ErrorKind::data, "evaluation corpus is empty");
    ADFG_REQUIRE(config.max_new_tokens >= 1, ErrorKind::config, "max_new_tokens must be at least 1");
    ADFG_REQUIRE(config.k >= 0, ErrorKind::config, "shot count must be non-negative");
    ADFG_REQUIRE(config.k == 0 || config.shot_pool != nullptr, ErrorKind::config, "few-shot prompts need an exemplar pool");
    if (config.shot_pool != nullptr) data::require_not_holdout(*config.shot_pool, "exemplar selection");
    data::PromptSpec spec = prompt;
    spec.k = config.k;

    const std::int32_t threads = thread_count(config.threads, corpus.size());
    std::vector<std::unique_ptr<adapters::InferenceHooks<float>>> hooks;
    for (std::int32_t t = 0; t < threads; ++t) {
        hooks.push_back(std::make_unique<adapters::InferenceHooks<float>>(composite, model.config()));
    }

    Evaluation ev;
    ev.outcomes.resize(corpus.size());
    parallel_for(corpus.size(), threads, [&](std::size_t i, std::int32_t t) {
        const data::Example& e = corpus[i];
        ExampleOutcome& o = ev.outcomes[i];
        o.id = e.id;
        o.reference = e.summary;
        const model::SiteHooks<float>* h = composite.empty() ? nullptr : hooks[static_cast<std::size_t>(t)].get();
        try {
            std::vector<data::Example> shots;
            if (config.k > 0) shots = data::pick_shots(*config.shot_pool, config.k, config.seed ^ fnv1a64(e.id), e.id);
            const auto ids = prompt_tokens(tokenizer, spec, e, shots, model.config().max_context,
                                           config.max_new_tokens, &o.truncated);
            o.prompt_tokens = static_cast<std::int64_t>(ids.size());
            const auto out = model::generate(model, ids, h, config.max_new_tokens, data::Tokenizer::kEos);
            o.candidate = trim(tokenizer.decode(out));
            if (config.perplexity) {
                model::ScoredSequence seq{ids, tokenizer.encode(" " + e.summary)};
                seq.continuation.push_back(data::Tokenizer::kEos);
                const model::PerplexityResult p = model::perplexity(model, h, std::span(&seq, 1));
                o.nll_tokens = p.tokens;
                o.nll_sum = p.mean_nll * static_cast<double>(p.tokens);
            }
            o.ok = true;
        } catch (const std::exception& ex) {
            o.error = ex.what();
        }
    });
    ev.report = score_outcomes(system, ev.outcomes, plugins);
    return ev;
}

}  // namespace adfg::evalmetrics
