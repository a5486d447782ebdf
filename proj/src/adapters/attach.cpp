// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/attach.hpp"

#include "adfg/common/error.hpp"
#include "adfg/numerics/ops.hpp"

namespace adfg::adapters {

using namespace adfg::numerics;

template <typename T>
Composite<T> compose(const std::vector<const AdapterState<T>*>& states, const std::vector<T>& weights) {
    ADFG_REQUIRE(!states.empty(), ErrorKind::composition, "compose: at least one adapter is required");
    ADFG_REQUIRE(weights.empty() || weights.size() == states.size(), ErrorKind::composition,
            "compose: " + std::to_string(weights.size()) + " weights for " + std::to_string(states.size()) +
                " adapters");
    Composite<T> c;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const AdapterState<T>* s = states[i];
        ADFG_REQUIRE(s != nullptr, ErrorKind::composition, "compose: null adapter");
        ADFG_REQUIRE(s->model_config == states[0]->model_config, ErrorKind::composition,
                "compose: adapters were built for different model configurations");
        c.members.push_back({s, weights.empty() ? T(1) : weights[i]});
    }
    return c;
}

template <typename T>
BoundComposite<T>::BoundComposite(Graph<T>& g, const Composite<T>& composite, const ModelConfig& model,
                                  AttachOptions options, std::mt19937_64* rng)
    : g_(&g), composite_(&composite), options_(options), rng_(rng) {
    ADFG_REQUIRE(!options.training || rng != nullptr, ErrorKind::config, "training-mode attachment needs a generator");
    for (std::size_t m = 0; m < composite.members.size(); ++m) {
        const AdapterState<T>& s = *composite.members[m].state;
        ADFG_REQUIRE(s.model_config == model, ErrorKind::attachment,
                std::string(to_string(s.config.method)) + " adapter was built for a different model configuration");
        const bool trainable = static_cast<std::int32_t>(m) == options.trainable_member;
        std::map<SiteId, std::map<std::string, Var>> bound;
        for (const auto& [site, tensors] : s.sites) {
            ADFG_REQUIRE(site.layer >= 0 && site.layer < model.n_layers, ErrorKind::attachment,
                    "adapter site outside the model: " + model::to_string(site));
            for (const auto& [name, t] : tensors) {
                bound[site][name] = trainable && is_trainable_name(name) ? g.parameter(t) : g.constant_ref(t);
            }
        }
        vars_.push_back(std::move(bound));
        bool skip = false;
        if (options.training && s.config.module_dropout > 0.0) {
            skip = std::bernoulli_distribution(s.config.module_dropout)(*rng_);
        }
        skipped_.push_back(skip);
    }
}

template <typename T>
const std::map<SiteId, std::map<std::string, Var>>& BoundComposite<T>::vars(std::size_t member) const {
    return vars_.at(member);
}

template <typename T>
Var BoundComposite<T>::dropout(Graph<T>& g, Var x, double p) const {
    if (!options_.training || p <= 0.0) return x;
    Tensor<T> mask(g.value(x).shape());
    std::bernoulli_distribution keep(1.0 - p);
    const T s = static_cast<T>(1.0 / (1.0 - p));
    for (T& v : mask.values()) v = keep(*rng_) ? s : T(0);
    return hadamard(g, x, g.constant(std::move(mask)));
}

template <typename T>
Var BoundComposite<T>::channel_dropout(Graph<T>& g, Var y, std::int64_t channels, double p) const {
    if (!options_.training || p <= 0.0) return y;
    Tensor<T> mask({channels});
    std::bernoulli_distribution keep(1.0 - p);
    const T s = static_cast<T>(1.0 / (1.0 - p));
    for (T& v : mask.values()) v = keep(*rng_) ? s : T(0);
    return scale_cols(g, y, g.constant(std::move(mask)));
}

template <typename T>
Var BoundComposite<T>::member_transform(std::size_t m, const SiteId& site) const {
    const auto key = std::make_pair(m, site);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    Graph<T>& g = *g_;
    const auto& member = composite_->members.at(m);
    const AdapterConfig& c = member.state->config;
    const T w = member.weight;
    auto site_vars = vars_.at(m).find(site);
    ADFG_REQUIRE(site_vars != vars_[m].end(), ErrorKind::site,
            std::string(to_string(c.method)) + " adapter does not target site " + model::to_string(site));
    const auto& v = site_vars->second;
    const T s = static_cast<T>(c.scaling()) * w;

    Var out;
    switch (c.method) {
        case Method::lora: out = scale(g, matmul(g, v.at("B"), v.at("A")), s); break;
        case Method::adalora: {
            Var lam = hadamard(g, v.at("Lambda"), v.at("aux.mask"));
            out = scale(g, matmul(g, scale_cols(g, v.at("P"), lam), v.at("Q")), w);
            break;
        }
        case Method::loha:
            out = scale(g, hadamard(g, matmul(g, v.at("B1"), v.at("A1")), matmul(g, v.at("B2"), v.at("A2"))), s);
            break;
        case Method::lokr: out = scale(g, kron(g, v.at("C"), matmul(g, v.at("B"), v.at("A"))), s); break;
        case Method::ia3: {
            Var l = v.at("l");
            if (w != T(1)) {
                const auto n = g.value(l).dim(0);
                l = add(g, scale(g, l, w), g.constant(Tensor<T>::full({n}, T(1) - w)));
            }
            out = l;
            break;
        }
        case Method::oft: {
            std::vector<Var> blocks;
            for (std::size_t i = 0;; ++i) {
                auto it = v.find("U" + std::to_string(i));
                if (it == v.end()) break;
                Var skew = sub(g, it->second, transpose(g, it->second));
                if (w != T(1)) skew = scale(g, skew, w);
                blocks.push_back(cayley(g, skew));
            }
            out = block_diag(g, blocks);
            break;
        }
    }
    cache_.emplace(key, out);
    return out;
}

template <typename T>
Var BoundComposite<T>::lowrank_contribution(Graph<T>& g, std::size_t m, const SiteId& site, Var x) const {
    const auto& member = composite_->members[m];
    const AdapterConfig& c = member.state->config;
    const auto& v = vars_[m].at(site);
    Var xin = dropout(g, x, c.dropout);
    if (c.method == Method::lora) {
        Var mid = channel_dropout(g, linear(g, xin, v.at("A")), c.rank, c.rank_dropout);
        return scale(g, linear(g, mid, v.at("B")), static_cast<T>(c.scaling()) * member.weight);
    }
    Var lam = hadamard(g, v.at("Lambda"), v.at("aux.mask"));
    Var mid = channel_dropout(g, scale_cols(g, linear(g, xin, v.at("Q")), lam), c.rank, c.rank_dropout);
    Var out = linear(g, mid, v.at("P"));
    return member.weight == T(1) ? out : scale(g, out, member.weight);
}

template <typename T>
Var BoundComposite<T>::projection(Graph<T>& g, const SiteId& site, Var x, Var base_out) const {
    const auto& members = composite_->members;
    Var y = base_out;
    for (std::size_t m = 0; m < members.size(); ++m) {
        const AdapterState<T>& s = *members[m].state;
        if (skipped_[m] || !is_delta_method(s.config.method) || !s.has_site(site)) continue;
        Var contrib;
        if (s.config.method == Method::lora || s.config.method == Method::adalora) {
            contrib = lowrank_contribution(g, m, site, x);
        } else {
            contrib = linear(g, dropout(g, x, s.config.dropout), member_transform(m, site));
            contrib = channel_dropout(g, contrib, g.value(contrib).cols(), s.config.rank_dropout);
        }
        y = add(g, y, contrib);
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
        const AdapterState<T>& s = *members[m].state;
        if (skipped_[m] || s.config.method != Method::ia3 || !s.has_site(site)) continue;
        y = scale_cols(g, y, member_transform(m, site));
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
        const AdapterState<T>& s = *members[m].state;
        if (skipped_[m] || s.config.method != Method::oft || !s.has_site(site)) continue;
        y = linear(g, y, member_transform(m, site));
    }
    return y;
}

template <typename T>
Var BoundComposite<T>::ffn_activation(Graph<T>& g, std::int32_t layer, Var act) const {
    const SiteId site{layer, Projection::ffn_act};
    const auto& members = composite_->members;
    for (std::size_t m = 0; m < members.size(); ++m) {
        const AdapterState<T>& s = *members[m].state;
        if (skipped_[m] || !s.has_site(site)) continue;
        act = scale_cols(g, act, member_transform(m, site));
    }
    return act;
}

template <typename T>
InferenceHooks<T>::InferenceHooks(Composite<T> composite, const ModelConfig& model)
    : composite_(std::move(composite)), model_(model) {
    // binding once up front surfaces attachment errors at construction
    Graph<T> probe;
    BoundComposite<T> check(probe, composite_, model_);
}

template <typename T>
BoundComposite<T>& InferenceHooks<T>::bound_for(Graph<T>& g) const {
    if (!bound_ || serial_ != g.serial()) {
        bound_ = std::make_unique<BoundComposite<T>>(g, composite_, model_);
        serial_ = g.serial();
    }
    return *bound_;
}

template <typename T>
Var InferenceHooks<T>::projection(Graph<T>& g, const SiteId& site, Var x, Var base_out) const {
    return bound_for(g).projection(g, site, x, base_out);
}

template <typename T>
Var InferenceHooks<T>::ffn_activation(Graph<T>& g, std::int32_t layer, Var act) const {
    return bound_for(g).ffn_activation(g, layer, act);
}

template class BoundComposite<float>;
template class BoundComposite<double>;
template class InferenceHooks<float>;
template class InferenceHooks<double>;
template Composite<float> compose(const std::vector<const AdapterState<float>*>&, const std::vector<float>&);
template Composite<double> compose(const std::vector<const AdapterState<double>*>&, const std::vector<double>&);

}  // namespace adfg::adapters
