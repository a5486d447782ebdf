// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/state.hpp"

#include <cmath>
#include <random>

#include "adfg/adapters/attach.hpp"
#include "adfg/common/error.hpp"
#include "adfg/numerics/linalg.hpp"

namespace adfg::adapters {

template <typename T>
const SiteTensors<T>& AdapterState<T>::site(const SiteId& s) const {
    auto it = sites.find(s);
    ADFG_REQUIRE(it != sites.end(), ErrorKind::site,
            std::string(to_string(config.method)) + " adapter does not target site " + model::to_string(s));
    return it->second;
}

template <typename T>
SiteTensors<T>& AdapterState<T>::site(const SiteId& s) {
    return const_cast<SiteTensors<T>&>(std::as_const(*this).site(s));
}

template <typename T>
std::int64_t AdapterState<T>::trainable_count() const {
    std::int64_t n = 0;
    for (const auto& [id, tensors] : sites) {
        for (const auto& [name, t] : tensors) {
            if (is_trainable_name(name)) n += t.numel();
        }
    }
    return n;
}

template <typename T>
template <typename U>
AdapterState<U> AdapterState<T>::cast() const {
    AdapterState<U> out;
    out.config = config;
    out.model_config = model_config;
    out.provenance = provenance;
    out.adalora_budget = adalora_budget;
    out.steps_taken = steps_taken;
    for (const auto& [id, tensors] : sites) {
        auto& dst = out.sites[id];
        for (const auto& [name, t] : tensors) dst.emplace(name, t.template cast<U>());
    }
    return out;
}

namespace {

template <typename T>
Tensor<T> uniform(numerics::Shape shape, double bound, std::mt19937_64& rng) {
    Tensor<T> t(std::move(shape));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T& x : t.values()) x = static_cast<T>(dist(rng));
    return t;
}

template <typename T>
Tensor<T> normal(numerics::Shape shape, double stddev, std::mt19937_64& rng) {
    Tensor<T> t(std::move(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (T& x : t.values()) x = static_cast<T>(dist(rng));
    return t;
}

/// Kaiming-uniform with a = √5, the usual default for linear layers: bound 1/√fan_in.
template <typename T>
Tensor<T> kaiming(numerics::Shape shape, std::mt19937_64& rng) {
    const double fan_in = static_cast<double>(shape.back());
    return uniform<T>(std::move(shape), 1.0 / std::sqrt(fan_in), rng);
}

}  // namespace

template <typename T>
AdapterState<T> init_adapter(const AdapterConfig& config, const ModelConfig& model, std::uint64_t seed) {
    model.validate();
    config.validate(model);
    AdapterState<T> s;
    s.config = config;
    s.model_config = model;
    std::mt19937_64 rng(seed);
    const std::int64_t r = config.rank;

    for (const SiteId& id : target_sites(config, model)) {
        const model::SiteShape sh = model::site_shape(model, id.proj);
        SiteTensors<T>& t = s.sites[id];
        switch (config.method) {
            case Method::lora:
                t["A"] = kaiming<T>({r, sh.d_in}, rng);
                t["B"] = Tensor<T>::zeros({sh.d_out, r});
                break;
            case Method::adalora:
                t["P"] = normal<T>({sh.d_out, r}, 0.02, rng);
                t["Lambda"] = Tensor<T>::zeros({r});
                t["Q"] = normal<T>({r, sh.d_in}, 0.02, rng);
                t["aux.mask"] = Tensor<T>::full({r}, T(1));
                for (const char* p : {"P", "Lambda", "Q"}) {
                    t[std::string("aux.") + p + ".ibar"] = Tensor<T>::zeros(t[p].shape());
                    t[std::string("aux.") + p + ".ubar"] = Tensor<T>::zeros(t[p].shape());
                }
                break;
            case Method::loha:
                // Only A2 starts at zero: zeroing a factor in both pairs would leave
                // every factor with a zero gradient.
                t["A1"] = normal<T>({r, sh.d_in}, 0.1, rng);
                t["B1"] = normal<T>({sh.d_out, r}, 1.0, rng);
                t["A2"] = Tensor<T>::zeros({r, sh.d_in});
                t["B2"] = normal<T>({sh.d_out, r}, 1.0, rng);
                break;
            case Method::lokr: {
                const auto [u_out, u_in] = lokr_factors(config, sh.d_out, sh.d_in);
                t["C"] = kaiming<T>({u_out, u_in}, rng);
                t["A"] = kaiming<T>({r, sh.d_in / u_in}, rng);
                t["B"] = Tensor<T>::zeros({sh.d_out / u_out, r});
                break;
            }
            case Method::ia3: {
                Tensor<T> l = Tensor<T>::full({sh.d_out}, T(1));
                if (config.ia3_init == Ia3Init::ones_noise) {
                    std::uniform_real_distribution<double> dist(-config.ia3_noise, config.ia3_noise);
                    for (T& x : l.values()) x = static_cast<T>(1.0 + dist(rng));
                } else if (config.ia3_init == Ia3Init::random) {
                    std::uniform_real_distribution<double> dist(0.5, 1.5);
                    for (T& x : l.values()) x = static_cast<T>(dist(rng));
                }
                t["l"] = std::move(l);
                break;
            }
            case Method::oft: {
                const std::int64_t b = config.oft_block_size(sh.d_out);
                for (std::int64_t i = 0; i < sh.d_out / b; ++i) t["U" + std::to_string(i)] = Tensor<T>::zeros({b, b});
                break;
            }
        }
    }
    if (config.method == Method::adalora) s.adalora_budget = config.adalora_initial_budget(model);
    return s;
}

template <typename T>
Tensor<T> delta(const AdapterState<T>& state, const SiteId& site) {
    (void)state.site(site);
    numerics::Graph<T> g;
    Composite<T> c = compose<T>({&state});
    BoundComposite<T> bound(g, c, state.model_config);
    return g.value(bound.member_transform(0, site));
}

template <typename T>
Tensor<T> oft_block_rotation(const AdapterState<T>& state, const SiteId& site, std::int64_t block) {
    ADFG_REQUIRE(state.config.method == Method::oft, ErrorKind::site, "not an oft adapter");
    const SiteTensors<T>& t = state.site(site);
    auto it = t.find("U" + std::to_string(block));
    ADFG_REQUIRE(it != t.end(), ErrorKind::site, "no such oft block: " + std::to_string(block));
    return numerics::cayley_values(numerics::skew_from(it->second));
}

template struct AdapterState<float>;
template struct AdapterState<double>;
template AdapterState<double> AdapterState<float>::cast<double>() const;
template AdapterState<float> AdapterState<double>::cast<float>() const;
template AdapterState<float> AdapterState<float>::cast<float>() const;
template AdapterState<float> init_adapter<float>(const AdapterConfig&, const ModelConfig&, std::uint64_t);
template AdapterState<double> init_adapter<double>(const AdapterConfig&, const ModelConfig&, std::uint64_t);
template Tensor<float> delta(const AdapterState<float>&, const SiteId&);
template Tensor<double> delta(const AdapterState<double>&, const SiteId&);
template Tensor<float> oft_block_rotation(const AdapterState<float>&, const SiteId&, std::int64_t);
template Tensor<double> oft_block_rotation(const AdapterState<double>&, const SiteId&, std::int64_t);

}  // namespace adfg::adapters
