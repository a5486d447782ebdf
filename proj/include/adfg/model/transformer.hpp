// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adfg/model/config.hpp"
#include "adfg/numerics/graph.hpp"
#include "adfg/numerics/tensor.hpp"

namespace adfg::model {

using numerics::Graph;
using numerics::Tensor;
using numerics::Var;
using TokenIds = std::vector<std::int32_t>;

/// Adapter-side hooks invoked at every attachment site during a forward
/// pass. The model computes the frozen projection and hands both the input
/// and the base output over; the hook returns the output to continue with.
template <typename T>
class SiteHooks {
public:
    virtual ~SiteHooks() = default;

    /// q/k/v/o sites. `base_out` is x·Wᵀ.
    virtual Var projection(Graph<T>& g, const SiteId& site, Var x, Var base_out) const = 0;
    /// FFN hidden activation (after the gated nonlinearity, before the down projection).
    virtual Var ffn_activation(Graph<T>& g, std::int32_t layer, Var act) const = 0;
};

/// Graph variables for every base weight, either constants (frozen) or
/// trainable leaves (base pretraining only).
struct BaseBinding {
    struct Layer {
        Var attn_norm, wq, wk, wv, wo, ffn_norm, w_gate, w_up, w_down;
    };
    Var embedding, final_norm, lm_head;
    std::vector<Layer> layers;

    std::vector<Var> all() const;
};

/// Decoder-only transformer with rotary positions, RMS normalization,
/// grouped-query attention and a SwiGLU feed-forward block. Weight matrices
/// are stored [d_out × d_in].
template <typename T>
class Transformer {
public:
    struct Layer {
        Tensor<T> attn_norm, wq, wk, wv, wo, ffn_norm, w_gate, w_up, w_down;
    };

    /// Seeded random initialization.
    Transformer(const ModelConfig& config, std::uint64_t seed);

    const ModelConfig& config() const noexcept { return config_; }
    const Layer& layer(std::int32_t i) const { return layers_.at(static_cast<std::size_t>(i)); }
    const Tensor<T>& embedding() const noexcept { return embedding_; }
    const Tensor<T>& final_norm() const noexcept { return final_norm_; }
    const Tensor<T>& lm_head() const noexcept { return lm_head_; }

    /// Weight of a q/k/v/o site.
    const Tensor<T>& projection(const SiteId& site) const;
    Tensor<T>& mutable_projection(const SiteId& site);

    /// Every base tensor with its checkpoint name, in a fixed order.
    std::vector<std::pair<std::string, const Tensor<T>*>> named_tensors() const;
    std::vector<std::pair<std::string, Tensor<T>*>> mutable_named_tensors();

    BaseBinding bind(Graph<T>& g, bool trainable = false) const;

    /// Logits [n × vocab] for `tokens`; `hooks` may be null.
    Var forward(Graph<T>& g, std::span<const std::int32_t> tokens, const SiteHooks<T>* hooks,
                const BaseBinding* base = nullptr) const;
    /// Final normalized hidden states [n × d_model].
    Var hidden(Graph<T>& g, std::span<const std::int32_t> tokens, const SiteHooks<T>* hooks,
               const BaseBinding* base = nullptr) const;

    Tensor<T> logits(std::span<const std::int32_t> tokens, const SiteHooks<T>* hooks = nullptr) const;

    /// FNV-1a over every base tensor's bytes; detects any change to frozen weights.
    std::uint64_t parameter_hash() const;

    template <typename U>
    Transformer<U> cast() const;

private:
    template <typename U>
    friend class Transformer;
    Transformer() = default;

    void check_context(std::size_t n) const;

    ModelConfig config_;
    Tensor<T> embedding_;
    std::vector<Layer> layers_;
    Tensor<T> final_norm_;
    Tensor<T> lm_head_;
};

using TransformerModel = Transformer<float>;

/// Greedy continuation: appends argmax tokens until `eos_id` is produced,
/// `max_new_tokens` is reached or the context fills up. The returned
/// sequence holds only the new tokens.
template <typename T>
TokenIds generate(const Transformer<T>& model, std::span<const std::int32_t> prompt, const SiteHooks<T>* hooks,
                  std::int32_t max_new_tokens, std::int32_t eos_id);

struct ScoredSequence {
    TokenIds prompt;
    TokenIds continuation;
};

struct PerplexityResult {
    double mean_nll = 0.0;
    double perplexity = 1.0;
    std::int64_t tokens = 0;
};

/// exp(mean negative log-likelihood of every continuation token given its
/// prompt and the preceding continuation tokens).
template <typename T>
PerplexityResult perplexity(const Transformer<T>& model, const SiteHooks<T>* hooks,
                            std::span<const ScoredSequence> corpus);

extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace adfg::model
