// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "adfg/adapters/state.hpp"
#include "adfg/model/transformer.hpp"
#include "adfg/numerics/graph.hpp"

namespace adfg::adapters {

using numerics::Graph;
using numerics::Var;

/// Weighted adapter list applied together at inference. Members are borrowed.
///
/// At a projection site the effective map is
///   y = R_n ⋯ R_1 · diag(l) · (W + Σ_i w_i Δ_i) x
/// where deltas come from lora/adalora/loha/lokr members, l is the product
/// of ia3 scales (weighted as 1 + w(l − 1)) and R_i are oft rotations
/// (weighted as cayley(w·S)) applied in list order. Delta composition is
/// order-independent; oft composition is not.
template <typename T>
struct Composite {
    struct Member {
        const AdapterState<T>* state = nullptr;
        T weight = T(1);
    };
    std::vector<Member> members;

    bool empty() const noexcept { return members.empty(); }
};

/// `weights` empty means 1.0 for every member.
template <typename T>
Composite<T> compose(const std::vector<const AdapterState<T>*>& states, const std::vector<T>& weights = {});

struct AttachOptions {
    /// Enables dropout and module dropout.
    bool training = false;
    /// Index of the member whose parameters become gradient-tracked leaves; -1 for none.
    std::int32_t trainable_member = -1;
};

/// A composite bound to one graph. Parameter tensors become graph leaves
/// once; derived matrices (explicit deltas, rotations) are built lazily and
/// reused across every forward pass recorded on the same graph.
template <typename T>
class BoundComposite final : public model::SiteHooks<T> {
public:
    BoundComposite(Graph<T>& g, const Composite<T>& composite, const ModelConfig& model,
                   AttachOptions options = {}, std::mt19937_64* rng = nullptr);

    Var projection(Graph<T>& g, const SiteId& site, Var x, Var base_out) const override;
    Var ffn_activation(Graph<T>& g, std::int32_t layer, Var act) const override;

    /// Delta / scale vector / rotation of one member at `site` (member weight applied).
    Var member_transform(std::size_t member, const SiteId& site) const;

    /// Leaves bound for a member: site → name → var.
    const std::map<SiteId, std::map<std::string, Var>>& vars(std::size_t member) const;

    /// Members skipped for this graph by module dropout.
    bool skipped(std::size_t member) const { return skipped_.at(member); }

private:
    Var dropout(Graph<T>& g, Var x, double p) const;
    Var channel_dropout(Graph<T>& g, Var y, std::int64_t channels, double p) const;
    Var lowrank_contribution(Graph<T>& g, std::size_t m, const SiteId& site, Var x) const;

    Graph<T>* g_;
    const Composite<T>* composite_;
    AttachOptions options_;
    std::mt19937_64* rng_;
    std::vector<std::map<SiteId, std::map<std::string, Var>>> vars_;
    std::vector<bool> skipped_;
    mutable std::map<std::pair<std::size_t, SiteId>, Var> cache_;
};

/// Inference-mode hooks usable with any graph: the composite is rebound
/// whenever a forward pass runs on a graph it has not seen. One instance
/// per thread.
template <typename T>
class InferenceHooks final : public model::SiteHooks<T> {
public:
    InferenceHooks(Composite<T> composite, const ModelConfig& model);

    Var projection(Graph<T>& g, const SiteId& site, Var x, Var base_out) const override;
    Var ffn_activation(Graph<T>& g, std::int32_t layer, Var act) const override;

    const Composite<T>& composite() const noexcept { return composite_; }

private:
    BoundComposite<T>& bound_for(Graph<T>& g) const;

    Composite<T> composite_;
    ModelConfig model_;
    mutable std::unique_ptr<BoundComposite<T>> bound_;
    mutable std::uint64_t serial_ = 0;
};

extern template class BoundComposite<float>;
extern template class BoundComposite<double>;
extern template class InferenceHooks<float>;
extern template class InferenceHooks<double>;

}  // namespace adfg::adapters
