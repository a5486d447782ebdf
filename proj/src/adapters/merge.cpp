// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/merge.hpp"

#include "adfg/common/error.hpp"

namespace adfg::adapters {

template <typename T>
model::Transformer<T> merge_into_base(const model::Transformer<T>& base, const AdapterState<T>& state) {
    return merge_into_base(base, compose<T>({&state}));
}

template <typename T>
model::Transformer<T> merge_into_base(const model::Transformer<T>& base, const Composite<T>& composite) {
    for (const auto& m : composite.members) {
        ADFG_REQUIRE(m.state->model_config == base.config(), ErrorKind::attachment,
                "merge: adapter was built for a different model configuration");
        if (m.state->config.method == Method::ia3) {
            ADFG_REQUIRE(!m.state->config.targets_site(Projection::ffn_act), ErrorKind::unsupported_merge,
                    "merge: ia3 scaling of the FFN activation cannot be folded into a projection");
        }
    }
    model::Transformer<T> out = base;
    for (std::int32_t layer = 0; layer < base.config().n_layers; ++layer) {
        for (Projection p : {Projection::q, Projection::k, Projection::v, Projection::o}) {
            const SiteId site{layer, p};
            Tensor<T>& w = out.mutable_projection(site);
            auto W = w.mat();
            for (const auto& m : composite.members) {
                if (is_delta_method(m.state->config.method) && m.state->has_site(site)) {
                    Tensor<T> d = delta(*m.state, site);
                    W += T(m.weight) * d.mat();
                }
            }
            for (const auto& m : composite.members) {
                if (m.state->config.method != Method::ia3 || !m.state->has_site(site)) continue;
                const Tensor<T> l = delta(*m.state, site);
                const Tensor<T> lw = m.weight == T(1) ? l : [&] {
                    Tensor<T> t = l;
                    for (T& x : t.values()) x = T(1) + m.weight * (x - T(1));
                    return t;
                }();
                for (std::int64_t i = 0; i < w.rows(); ++i) W.row(i) *= lw[static_cast<std::size_t>(i)];
            }
            for (const auto& m : composite.members) {
                if (m.state->config.method != Method::oft || !m.state->has_site(site)) continue;
                numerics::Graph<T> g;
                Composite<T> single{{{m.state, m.weight}}};
                BoundComposite<T> bound(g, single, base.config());
                const Tensor<T>& r = g.value(bound.member_transform(0, site));
                const typename Tensor<T>::Matrix rotated = r.mat() * W;
                W = rotated;
            }
        }
    }
    return out;
}

template model::Transformer<float> merge_into_base(const model::Transformer<float>&, const AdapterState<float>&);
template model::Transformer<double> merge_into_base(const model::Transformer<double>&, const AdapterState<double>&);
template model::Transformer<float> merge_into_base(const model::Transformer<float>&, const Composite<float>&);
template model::Transformer<double> merge_into_base(const model::Transformer<double>&, const Composite<double>&);

}  // namespace adfg::adapters
