// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/model/config.hpp"

#include "adfg/common/error.hpp"

namespace adfg::model {

ModelConfig ModelConfig::desk() {
    return ModelConfig{};
}

ModelConfig ModelConfig::reference() {
    ModelConfig c;
    c.n_layers = 32;
    c.d_model = 4096;
    c.n_heads = 32;
    c.n_kv_heads = 8;
    c.d_head = 128;
    c.d_ff = 14336;
    c.vocab_size = 128256;
    c.max_context = 8192;
    return c;
}

void ModelConfig::validate() const {
    auto check = [](bool ok, const std::string& what) { ADFG_REQUIRE(ok, ErrorKind::config, "model config: " + what); };
    check(n_layers >= 1, "n_layers must be >= 1");
    check(n_heads >= 1 && n_kv_heads >= 1, "head counts must be >= 1");
    check(n_heads % n_kv_heads == 0, "n_heads must be divisible by n_kv_heads");
    check(d_head >= 2 && d_head % 2 == 0, "d_head must be even (rotary encoding)");
    check(d_model == n_heads * d_head, "d_model must equal n_heads * d_head");
    check(d_ff >= 1, "d_ff must be >= 1");
    check(vocab_size >= 4, "vocab_size too small");
    check(max_context >= 1, "max_context must be >= 1");
}

std::int64_t ModelConfig::base_parameter_count() const {
    const std::int64_t d = d_model;
    const std::int64_t per_layer = d * d * 2 + d * kv_dim() * 2 + d * std::int64_t{d_ff} * 3 + 2 * d;
    return std::int64_t{vocab_size} * d * 2 + per_layer * n_layers + d;
}

std::array<std::int32_t, 8> ModelConfig::as_array() const {
    return {n_layers, d_model, n_heads, n_kv_heads, d_head, d_ff, vocab_size, max_context};
}

ModelConfig ModelConfig::from_array(const std::array<std::int32_t, 8>& f) {
    return ModelConfig{f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]};
}

std::string_view to_string(Projection p) {
    switch (p) {
        case Projection::q: return "q";
        case Projection::k: return "k";
        case Projection::v: return "v";
        case Projection::o: return "o";
        case Projection::ffn_act: return "ffn_act";
    }
    return "?";
}

std::optional<Projection> parse_projection(std::string_view name) {
    if (name == "q") return Projection::q;
    if (name == "k") return Projection::k;
    if (name == "v") return Projection::v;
    if (name == "o") return Projection::o;
    if (name == "ffn_act" || name == "ffn-act" || name == "ffn") return Projection::ffn_act;
    return std::nullopt;
}

std::string to_string(const SiteId& site) {
    return "layers." + std::to_string(site.layer) + "." + std::string(to_string(site.proj));
}

SiteShape site_shape(const ModelConfig& config, Projection p) {
    switch (p) {
        case Projection::q:
        case Projection::o: return {config.d_model, config.d_model};
        case Projection::k:
        case Projection::v: return {config.kv_dim(), config.d_model};
        case Projection::ffn_act: return {config.d_ff, config.d_ff};
    }
    return {0, 0};
}

}  // namespace adfg::model
