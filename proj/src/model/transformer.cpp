// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/model/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "adfg/common/error.hpp"
#include "adfg/numerics/ops.hpp"

namespace adfg::model {

using namespace adfg::numerics;

std::vector<Var> BaseBinding::all() const {
    std::vector<Var> out{embedding};
    for (const Layer& l : layers) {
        out.insert(out.end(), {l.attn_norm, l.wq, l.wk, l.wv, l.wo, l.ffn_norm, l.w_gate, l.w_up, l.w_down});
    }
    out.push_back(final_norm);
    out.push_back(lm_head);
    return out;
}

namespace {

template <typename T>
Tensor<T> normal(Shape shape, double stddev, std::mt19937_64& rng) {
    Tensor<T> t(std::move(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (T& x : t.values()) x = static_cast<T>(dist(rng));
    return t;
}

}  // namespace

template <typename T>
Transformer<T>::Transformer(const ModelConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(seed);
    const std::int64_t d = config.d_model;
    const std::int64_t kv = config.kv_dim();
    const std::int64_t ff = config.d_ff;
    const double s_d = 1.0 / std::sqrt(static_cast<double>(d));
    const double s_ff = 1.0 / std::sqrt(static_cast<double>(ff));
    // residual-branch outputs are shrunk with depth so the stream stays O(1)
    const double s_out = s_d / std::sqrt(2.0 * config.n_layers);

    embedding_ = normal<T>({config.vocab_size, d}, 0.02 * std::sqrt(static_cast<double>(d)) / 4.0, rng);
    layers_.reserve(static_cast<std::size_t>(config.n_layers));
    for (std::int32_t i = 0; i < config.n_layers; ++i) {
        Layer l;
        l.attn_norm = Tensor<T>::full({d}, T(1));
        l.wq = normal<T>({d, d}, s_d, rng);
        l.wk = normal<T>({kv, d}, s_d, rng);
        l.wv = normal<T>({kv, d}, s_d, rng);
        l.wo = normal<T>({d, d}, s_out, rng);
        l.ffn_norm = Tensor<T>::full({d}, T(1));
        l.w_gate = normal<T>({ff, d}, s_d, rng);
        l.w_up = normal<T>({ff, d}, s_d, rng);
        l.w_down = normal<T>({d, ff}, s_ff / std::sqrt(2.0 * config.n_layers), rng);
        layers_.push_back(std::move(l));
    }
    final_norm_ = Tensor<T>::full({d}, T(1));
    lm_head_ = normal<T>({config.vocab_size, d}, s_d, rng);
}

template <typename T>
const Tensor<T>& Transformer<T>::projection(const SiteId& site) const {
    ADFG_REQUIRE(site.layer >= 0 && site.layer < config_.n_layers, ErrorKind::site,
            "no such layer: " + std::to_string(site.layer));
    const Layer& l = layers_[static_cast<std::size_t>(site.layer)];
    switch (site.proj) {
        case Projection::q: return l.wq;
        case Projection::k: return l.wk;
        case Projection::v: return l.wv;
        case Projection::o: return l.wo;
        case Projection::ffn_act: break;
    }
    fail(ErrorKind::site, "site has no weight matrix: " + to_string(site));
}

template <typename T>
Tensor<T>& Transformer<T>::mutable_projection(const SiteId& site) {
    return const_cast<Tensor<T>&>(std::as_const(*this).projection(site));
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> Transformer<T>::named_tensors() const {
    std::vector<std::pair<std::string, const Tensor<T>*>> out;
    out.emplace_back("embedding", &embedding_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string p = "layers." + std::to_string(i) + ".";
        const Layer& l = layers_[i];
        out.emplace_back(p + "attn_norm", &l.attn_norm);
        out.emplace_back(p + "wq", &l.wq);
        out.emplace_back(p + "wk", &l.wk);
        out.emplace_back(p + "wv", &l.wv);
        out.emplace_back(p + "wo", &l.wo);
        out.emplace_back(p + "ffn_norm", &l.ffn_norm);
        out.emplace_back(p + "w_gate", &l.w_gate);
        out.emplace_back(p + "w_up", &l.w_up);
        out.emplace_back(p + "w_down", &l.w_down);
    }
    out.emplace_back("final_norm", &final_norm_);
    out.emplace_back("lm_head", &lm_head_);
    return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Transformer<T>::mutable_named_tensors() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (auto& [name, t] : std::as_const(*this).named_tensors()) out.emplace_back(name, const_cast<Tensor<T>*>(t));
    return out;
}

template <typename T>
BaseBinding Transformer<T>::bind(Graph<T>& g, bool trainable) const {
    auto b = [&](const Tensor<T>& t) { return trainable ? g.parameter(t) : g.constant_ref(t); };
    BaseBinding out;
    out.embedding = b(embedding_);
    for (const Layer& l : layers_) {
        out.layers.push_back({b(l.attn_norm), b(l.wq), b(l.wk), b(l.wv), b(l.wo), b(l.ffn_norm), b(l.w_gate),
                              b(l.w_up), b(l.w_down)});
    }
    out.final_norm = b(final_norm_);
    out.lm_head = b(lm_head_);
    return out;
}

template <typename T>
void Transformer<T>::check_context(std::size_t n) const {
    ADFG_REQUIRE(n >= 1, ErrorKind::input, "forward: empty token sequence");
    ADFG_REQUIRE(n <= static_cast<std::size_t>(config_.max_context), ErrorKind::context,
            "sequence of " + std::to_string(n) + " tokens exceeds the context window of " +
                std::to_string(config_.max_context));
}

template <typename T>
Var Transformer<T>::hidden(Graph<T>& g, std::span<const std::int32_t> tokens, const SiteHooks<T>* hooks,
                           const BaseBinding* base) const {
    check_context(tokens.size());
    for (std::int32_t t : tokens) {
        ADFG_REQUIRE(t >= 0 && t < config_.vocab_size, ErrorKind::input, "token id out of range: " + std::to_string(t));
    }
    BaseBinding local;
    if (base == nullptr) {
        local = bind(g, false);
        base = &local;
    }
    const T eps = static_cast<T>(kNormEps);
    const std::int64_t H = config_.n_heads;
    const std::int64_t G = config_.n_kv_heads;
    const std::int64_t dh = config_.d_head;

    auto site = [&](std::int32_t layer, Projection p, Var x, Var w) {
        Var y = linear(g, x, w);
        return hooks ? hooks->projection(g, SiteId{layer, p}, x, y) : y;
    };

    Var h = numerics::embedding(g, base->embedding, tokens);
    for (std::int32_t i = 0; i < config_.n_layers; ++i) {
        const BaseBinding::Layer& l = base->layers[static_cast<std::size_t>(i)];
        Var x = rms_norm(g, h, l.attn_norm, eps);
        Var q = rope(g, site(i, Projection::q, x, l.wq), H, dh, kRopeTheta);
        Var k = rope(g, site(i, Projection::k, x, l.wk), G, dh, kRopeTheta);
        Var v = site(i, Projection::v, x, l.wv);
        Var a = causal_attention(g, q, k, v, H, G);
        h = add(g, h, site(i, Projection::o, a, l.wo));

        Var f = rms_norm(g, h, l.ffn_norm, eps);
        Var act = hadamard(g, silu(g, linear(g, f, l.w_gate)), linear(g, f, l.w_up));
        if (hooks) act = hooks->ffn_activation(g, i, act);
        h = add(g, h, linear(g, act, l.w_down));
    }
    return rms_norm(g, h, base->final_norm, eps);
}

template <typename T>
Var Transformer<T>::forward(Graph<T>& g, std::span<const std::int32_t> tokens, const SiteHooks<T>* hooks,
                            const BaseBinding* base) const {
    BaseBinding local;
    if (base == nullptr) {
        local = bind(g, false);
        base = &local;
    }
    return linear(g, hidden(g, tokens, hooks, base), base->lm_head);
}

template <typename T>
Tensor<T> Transformer<T>::logits(std::span<const std::int32_t> tokens, const SiteHooks<T>* hooks) const {
    Graph<T> g;
    return g.value(forward(g, tokens, hooks));
}

template <typename T>
std::uint64_t Transformer<T>::parameter_hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [name, t] : named_tensors()) {
        mix(name.data(), name.size());
        for (std::int64_t d : t->shape()) mix(&d, sizeof d);
        mix(t->data(), static_cast<std::size_t>(t->numel()) * sizeof(T));
    }
    return h;
}

template <typename T>
template <typename U>
Transformer<U> Transformer<T>::cast() const {
    Transformer<U> out;
    out.config_ = config_;
    out.embedding_ = embedding_.template cast<U>();
    for (const Layer& l : layers_) {
        out.layers_.push_back({l.attn_norm.template cast<U>(), l.wq.template cast<U>(), l.wk.template cast<U>(),
                               l.wv.template cast<U>(), l.wo.template cast<U>(), l.ffn_norm.template cast<U>(),
                               l.w_gate.template cast<U>(), l.w_up.template cast<U>(), l.w_down.template cast<U>()});
    }
    out.final_norm_ = final_norm_.template cast<U>();
    out.lm_head_ = lm_head_.template cast<U>();
    return out;
}

template <typename T>
TokenIds generate(const Transformer<T>& model, std::span<const std::int32_t> prompt, const SiteHooks<T>* hooks,
                  std::int32_t max_new_tokens, std::int32_t eos_id) {
    const auto ctx = static_cast<std::size_t>(model.config().max_context);
    TokenIds seq(prompt.begin(), prompt.end());
    ADFG_REQUIRE(!seq.empty(), ErrorKind::input, "generate: empty prompt");
    ADFG_REQUIRE(seq.size() <= ctx, ErrorKind::context,
            "prompt of " + std::to_string(seq.size()) + " tokens exceeds the context window of " +
                std::to_string(ctx));
    TokenIds out;
    while (static_cast<std::int32_t>(out.size()) < max_new_tokens && seq.size() < ctx) {
        const Tensor<T> logits = model.logits(seq, hooks);
        const std::int64_t V = logits.cols();
        const T* last = logits.data() + (logits.rows() - 1) * V;
        const auto next = static_cast<std::int32_t>(std::max_element(last, last + V) - last);
        if (next == eos_id) break;
        out.push_back(next);
        seq.push_back(next);
    }
    return out;
}

template <typename T>
PerplexityResult perplexity(const Transformer<T>& model, const SiteHooks<T>* hooks,
                            std::span<const ScoredSequence> corpus) {
    double total = 0.0;
    std::int64_t count = 0;
    const auto ctx = static_cast<std::size_t>(model.config().max_context);
    for (const ScoredSequence& s : corpus) {
        if (s.continuation.empty()) continue;
        TokenIds seq = s.prompt;
        seq.insert(seq.end(), s.continuation.begin(), s.continuation.end());
        // keep the continuation whole and drop the oldest prompt tokens
        ADFG_REQUIRE(!s.prompt.empty(), ErrorKind::input, "perplexity: empty prompt");
        const std::size_t first = seq.size() > ctx ? seq.size() - ctx : 0;
        ADFG_REQUIRE(first < s.prompt.size(), ErrorKind::context, "continuation does not fit in the context window");
        const std::span<const std::int32_t> window(seq.data() + first, seq.size() - first);
        const Tensor<T> logits = model.logits(window, hooks);
        const std::int64_t V = logits.cols();
        const std::size_t p = s.prompt.size() - first;
        for (std::size_t j = 0; j < s.continuation.size(); ++j) {
            const T* row = logits.data() + static_cast<std::int64_t>(p - 1 + j) * V;
            const double mx = *std::max_element(row, row + V);
            double z = 0.0;
            for (std::int64_t c = 0; c < V; ++c) z += std::exp(static_cast<double>(row[c]) - mx);
            total += mx + std::log(z) - static_cast<double>(row[s.continuation[j]]);
            ++count;
        }
    }
    ADFG_REQUIRE(count > 0, ErrorKind::input, "perplexity: no continuation tokens to score");
    PerplexityResult r;
    r.tokens = count;
    r.mean_nll = total / static_cast<double>(count);
    r.perplexity = std::exp(r.mean_nll);
    return r;
}

template class Transformer<float>;
template class Transformer<double>;
template Transformer<double> Transformer<float>::cast<double>() const;
template Transformer<float> Transformer<double>::cast<float>() const;
template Transformer<float> Transformer<float>::cast<float>() const;
template TokenIds generate(const Transformer<float>&, std::span<const std::int32_t>, const SiteHooks<float>*,
                           std::int32_t, std::int32_t);
template TokenIds generate(const Transformer<double>&, std::span<const std::int32_t>, const SiteHooks<double>*,
                           std::int32_t, std::int32_t);
template PerplexityResult perplexity(const Transformer<float>&, const SiteHooks<float>*,
                                     std::span<const ScoredSequence>);
template PerplexityResult perplexity(const Transformer<double>&, const SiteHooks<double>*,
                                     std::span<const ScoredSequence>);

}  // namespace adfg::model
