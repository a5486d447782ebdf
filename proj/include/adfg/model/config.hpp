// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace adfg::model {

struct ModelConfig {
    std::int32_t n_layers = 4;
    std::int32_t d_model = 128;
    std::int32_t n_heads = 4;
    std::int32_t n_kv_heads = 2;
    std::int32_t d_head = 32;
    std::int32_t d_ff = 344;
    std::int32_t vocab_size = 512;
    std::int32_t max_context = 256;

    /// Desk-scale default: grouped-query (4 query / 2 key-value heads), CPU-trainable in minutes.
    static ModelConfig desk();
    /// 32-layer grouped-query configuration used for parameter accounting at the 8B scale.
    static ModelConfig reference();

    std::int64_t kv_dim() const { return std::int64_t{n_kv_heads} * d_head; }

    /// Throws ErrorKind::config when an invariant fails.
    void validate() const;

    /// Embeddings + untied output head + per-layer projections, FFN and norm gains + final norm.
    std::int64_t base_parameter_count() const;

    std::array<std::int32_t, 8> as_array() const;
    static ModelConfig from_array(const std::array<std::int32_t, 8>& fields);

    bool operator==(const ModelConfig&) const = default;
};

inline constexpr double kRopeTheta = 10000.0;
inline constexpr double kNormEps = 1e-5;

/// Attachment points inside one decoder layer.
enum class Projection : std::uint8_t { q, k, v, o, ffn_act };

std::string_view to_string(Projection p);
std::optional<Projection> parse_projection(std::string_view name);

struct SiteId {
    std::int32_t layer = 0;
    Projection proj = Projection::q;

    auto operator<=>(const SiteId&) const = default;
};

std::string to_string(const SiteId& site);

/// Output and input widths of the linear map at a site. For ffn_act the site
/// is the FFN hidden activation and both widths equal d_ff.
struct SiteShape {
    std::int64_t d_out;
    std::int64_t d_in;
};

SiteShape site_shape(const ModelConfig& config, Projection p);

}  // namespace adfg::model
