// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/training/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "adfg/common/error.hpp"

namespace adfg::training {

std::string_view to_string(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adamw";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adamw" || name == "adam") return OptimizerKind::adamw;
    return std::nullopt;
}

void OptimizerConfig::validate() const {
    ADFG_REQUIRE(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorKind::config,
            "optimizer betas must lie in [0, 1)");
    ADFG_REQUIRE(eps > 0.0, ErrorKind::config, "optimizer eps must be positive");
    ADFG_REQUIRE(weight_decay >= 0.0, ErrorKind::config, "weight decay must be non-negative");
    ADFG_REQUIRE(clip_norm >= 0.0, ErrorKind::config, "clip norm must be non-negative");
}

std::string OptimizerConfig::describe() const {
    std::ostringstream s;
    s << "optimizer=" << to_string(kind);
    if (kind == OptimizerKind::adamw) s << " beta1=" << beta1 << " beta2=" << beta2 << " eps=" << eps;
    s << " weight_decay=" << weight_decay << " clip_norm=" << (clip_norm > 0.0 ? std::to_string(clip_norm) : "off");
    s << " (optimizer and weight decay of the reference runs are unstated)";
    return s.str();
}

template <typename T>
Optimizer<T>::Optimizer(OptimizerConfig config) : config_(config) {
    config_.validate();
}

template <typename T>
void Optimizer<T>::step(const std::vector<Tensor<T>*>& params, const std::vector<Tensor<T>>& grads, double lr) {
    ADFG_REQUIRE(params.size() == grads.size(), ErrorKind::dimension, "optimizer: parameter and gradient lists differ");
    if (m_.empty() && config_.kind == OptimizerKind::adamw) {
        for (const Tensor<T>* p : params) {
            m_.push_back(Tensor<T>::zeros(p->shape()));
            v_.push_back(Tensor<T>::zeros(p->shape()));
        }
    }
    double sq = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        ADFG_REQUIRE(params[i]->shape() == grads[i].shape(), ErrorKind::dimension, "optimizer: gradient shape mismatch");
        for (T g : grads[i].values()) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    last_norm_ = std::sqrt(sq);
    ADFG_REQUIRE(std::isfinite(last_norm_), ErrorKind::numeric, "optimizer: non-finite gradient");
    const double clip = config_.clip_norm > 0.0 && last_norm_ > config_.clip_norm ? config_.clip_norm / last_norm_ : 1.0;
    ++steps_;
    const double decay = 1.0 - lr * config_.weight_decay;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor<T>& p = *params[i];
        const Tensor<T>& g = grads[i];
        for (std::size_t k = 0; k < p.numel(); ++k) {
            const double gk = static_cast<double>(g[k]) * clip;
            double pk = static_cast<double>(p[k]) * decay;
            if (config_.kind == OptimizerKind::sgd) {
                pk -= lr * gk;
            } else {
                const double m = config_.beta1 * static_cast<double>(m_[i][k]) + (1.0 - config_.beta1) * gk;
                const double v = config_.beta2 * static_cast<double>(v_[i][k]) + (1.0 - config_.beta2) * gk * gk;
                m_[i][k] = static_cast<T>(m);
                v_[i][k] = static_cast<T>(v);
                pk -= lr * (m / bc1) / (std::sqrt(v / bc2) + config_.eps);
            }
            p[k] = static_cast<T>(pk);
        }
    }
}

template class Optimizer<float>;
template class Optimizer<double>;

}  // namespace adfg::training
