// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/adapters/param_count.hpp"

namespace adfg::adapters {

std::int64_t site_param_count(const AdapterConfig& c, const ModelConfig& model, Projection p) {
    const model::SiteShape s = model::site_shape(model, p);
    const std::int64_t r = c.rank;
    switch (c.method) {
        case Method::lora: return r * (s.d_in + s.d_out);
        case Method::adalora: return r * (s.d_in + s.d_out) + r;
        case Method::loha: return 2 * r * (s.d_in + s.d_out);
        case Method::lokr: {
            const auto [u_out, u_in] = lokr_factors(c, s.d_out, s.d_in);
            return u_out * u_in + r * (s.d_out / u_out + s.d_in / u_in);
        }
        case Method::ia3: return s.d_out;
        case Method::oft: return s.d_out * c.oft_block_size(s.d_out);
    }
    return 0;
}

ParamCount trainable_param_count(const AdapterConfig& config, const ModelConfig& model) {
    config.validate(model);
    ParamCount out;
    for (Projection p : config.targets) out.trainable += site_param_count(config, model, p);
    out.trainable *= model.n_layers;
    out.base = model.base_parameter_count();
    out.percent = 100.0 * static_cast<double>(out.trainable) / static_cast<double>(out.base + out.trainable);
    return out;
}

}  // namespace adfg::adapters
