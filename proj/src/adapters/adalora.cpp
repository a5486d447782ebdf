// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/adalora.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "adfg/common/error.hpp"

namespace adfg::adapters {

std::int64_t adalora_budget(const AdapterConfig& config, const ModelConfig& model, std::int64_t step,
                            std::int64_t total_steps) {
    ADFG_REQUIRE(total_steps >= 1, ErrorKind::config, "adalora schedule: total_steps must be >= 1");
    ADFG_REQUIRE(step >= 0 && step <= total_steps, ErrorKind::config, "adalora schedule: step outside [0, total_steps]");
    const std::int64_t b0 = config.adalora_initial_budget(model);
    const std::int64_t b1 = config.adalora_final_budget(model);
    const double T = static_cast<double>(total_steps);
    const double t_i = config.adalora_warmup * T;
    const double t_f = config.adalora_final * T;
    const double t = static_cast<double>(step);
    if (t < t_i) return b0;
    if (t >= T - t_f || step == total_steps) return b1;
    const double frac = 1.0 - (t - t_i) / (T - t_i - t_f);
    return b1 + static_cast<std::int64_t>(std::floor(static_cast<double>(b0 - b1) * frac * frac * frac));
}

template <typename T>
Tensor<T> adalora_scores(const AdapterState<T>& state, const SiteId& site) {
    const SiteTensors<T>& t = state.site(site);
    const std::int64_t r = state.config.rank;
    const auto score = [&](const char* name) {
        const Tensor<T>& i = t.at(std::string("aux.") + name + ".ibar");
        const Tensor<T>& u = t.at(std::string("aux.") + name + ".ubar");
        Tensor<T> s(i.shape());
        for (std::size_t k = 0; k < i.numel(); ++k) s[k] = i[k] * u[k];
        return s;
    };
    const Tensor<T> sp = score("P"), sl = score("Lambda"), sq = score("Q");
    Tensor<T> out({r});
    const std::int64_t d_out = sp.rows(), d_in = sq.cols();
    for (std::int64_t k = 0; k < r; ++k) {
        T p = 0, q = 0;
        for (std::int64_t i = 0; i < d_out; ++i) p += sp(i, k);
        for (std::int64_t j = 0; j < d_in; ++j) q += sq(k, j);
        out[k] = sl[k] + p / static_cast<T>(d_out) + q / static_cast<T>(d_in);
    }
    return out;
}

template <typename T>
std::int64_t adalora_active(const AdapterState<T>& state) {
    std::int64_t n = 0;
    for (const auto& [site, t] : state.sites) {
        for (T m : t.at("aux.mask").values()) n += m != T(0);
    }
    return n;
}

template <typename T>
void adalora_step(AdapterState<T>& state, SiteMap<T>& gradients, std::int64_t step, std::int64_t total_steps) {
    ADFG_REQUIRE(state.config.method == Method::adalora, ErrorKind::config, "adalora_step on a non-adalora adapter");
    const AdapterConfig& c = state.config;
    const T b1 = static_cast<T>(c.adalora_beta1), b2 = static_cast<T>(c.adalora_beta2);

    for (auto& [site, t] : state.sites) {
        auto git = gradients.find(site);
        ADFG_REQUIRE(git != gradients.end(), ErrorKind::input, "adalora_step: no gradients for " + model::to_string(site));
        for (const char* name : {"P", "Lambda", "Q"}) {
            const Tensor<T>& theta = t.at(name);
            const Tensor<T>& grad = git->second.at(name);
            Tensor<T>& ibar = t.at(std::string("aux.") + name + ".ibar");
            Tensor<T>& ubar = t.at(std::string("aux.") + name + ".ubar");
            for (std::size_t k = 0; k < theta.numel(); ++k) {
                const T sens = std::abs(theta[k] * grad[k]);
                ibar[k] = b1 * ibar[k] + (T(1) - b1) * sens;
                ubar[k] = b2 * ubar[k] + (T(1) - b2) * std::abs(sens - ibar[k]);
            }
        }
    }

    const std::int64_t budget = adalora_budget(c, state.model_config, step, total_steps);
    const bool warmup = static_cast<double>(step) < c.adalora_warmup * static_cast<double>(total_steps);
    const bool frozen = static_cast<double>(step) >= (1.0 - c.adalora_final) * static_cast<double>(total_steps);
    if (!warmup && (!frozen || budget != adalora_active(state))) {
        // global top-`budget` over every triplet; ties resolve by (site, index) order
        std::vector<std::tuple<T, SiteId, std::size_t>> all;
        for (const auto& [site, t] : state.sites) {
            const Tensor<T> s = adalora_scores(state, site);
            for (std::size_t k = 0; k < s.numel(); ++k) all.emplace_back(s[k], site, k);
        }
        std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
        for (auto& [site, t] : state.sites) t.at("aux.mask").fill(T(0));
        for (std::int64_t i = 0; i < budget && i < static_cast<std::int64_t>(all.size()); ++i) {
            const auto& [score, site, k] = all[static_cast<std::size_t>(i)];
            state.sites.at(site).at("aux.mask")[k] = T(1);
        }
    }
    state.adalora_budget = budget;

    const T gamma = static_cast<T>(c.adalora_gamma);
    if (gamma > T(0)) {
        for (auto& [site, t] : state.sites) {
            SiteTensors<T>& g = gradients.at(site);
            const auto P = t.at("P").mat();
            const auto Q = t.at("Q").mat();
            const std::int64_t r = c.rank;
            using M = typename Tensor<T>::Matrix;
            const M I = M::Identity(r, r);
            const M gp = T(4) * gamma * (P * (P.transpose() * P - I));
            const M gq = T(4) * gamma * ((Q * Q.transpose() - I) * Q);
            g.at("P").mat() += gp;
            g.at("Q").mat() += gq;
        }
    }
    ++state.steps_taken;
}

template Tensor<float> adalora_scores(const AdapterState<float>&, const SiteId&);
template Tensor<double> adalora_scores(const AdapterState<double>&, const SiteId&);
template std::int64_t adalora_active(const AdapterState<float>&);
template std::int64_t adalora_active(const AdapterState<double>&);
template void adalora_step(AdapterState<float>&, SiteMap<float>&, std::int64_t, std::int64_t);
template void adalora_step(AdapterState<double>&, SiteMap<double>&, std::int64_t, std::int64_t);

}  // namespace adfg::adapters
