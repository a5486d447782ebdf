// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adfg/model/config.hpp"

namespace adfg::adapters {

using model::ModelConfig;
using model::Projection;
using model::SiteId;

enum class Method : std::uint8_t { lora, adalora, loha, lokr, ia3, oft };

inline constexpr Method kAllMethods[] = {Method::adalora, Method::ia3,  Method::loha,
                                         Method::lokr,    Method::lora, Method::oft};

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);
/// "lora, adalora, ..." for error messages.
std::string valid_method_names();

/// Delta-type methods add a weight-space update; ia3 rescales, oft rotates.
bool is_delta_method(Method m);

enum class Ia3Init : std::uint8_t { ones, ones_noise, random };
/// How the oft "rank" knob is read: the side length of each block, or the
/// number of blocks a site's output dimension is split into.
enum class OftBlockMode : std::uint8_t { size, count };

struct AdapterConfig {
    Method method = Method::lora;
    std::int32_t rank = 8;
    double alpha = 8.0;
    double dropout = 0.0;         // input dropout (lora_dropout)
    double rank_dropout = 0.0;    // zeroes random rank / output channels
    double module_dropout = 0.0;  // skips the whole adapter for a step
    std::vector<Projection> targets{Projection::q, Projection::k, Projection::v, Projection::o};
    bool train_bias = false;  // accepted for compatibility; projections carry no bias

    // adalora
    std::int64_t adalora_b_init = 0;   // 0: rank · |targets| · n_layers
    std::int64_t adalora_b_final = 0;  // 0: half of b_init
    double adalora_warmup = 0.1;       // fraction of steps before pruning starts
    double adalora_final = 0.2;        // fraction of steps with the budget frozen at b_final
    double adalora_gamma = 0.5;        // orthogonality penalty weight
    double adalora_beta1 = 0.85;
    double adalora_beta2 = 0.85;

    // lokr: factor of each dimension used for the small Kronecker factor; 0 means auto
    std::int32_t lokr_factor = 0;

    // oft
    std::int32_t oft_block = 16;
    OftBlockMode oft_block_mode = OftBlockMode::size;

    // ia3
    Ia3Init ia3_init = Ia3Init::ones;
    double ia3_noise = 0.1;

    /// Hyperparameters reported for the 8B-scale runs.
    static AdapterConfig reference(Method m);
    /// Scaled-down defaults for the desk model.
    static AdapterConfig desk(Method m);

    double scaling() const { return alpha / rank; }
    bool targets_site(Projection p) const;

    /// Throws ErrorKind::config when the configuration cannot attach to `model`.
    void validate(const ModelConfig& model) const;

    std::int64_t adalora_initial_budget(const ModelConfig& model) const;
    std::int64_t adalora_final_budget(const ModelConfig& model) const;

    /// Side length of each oft block for a site with `d_out` outputs.
    std::int64_t oft_block_size(std::int64_t d_out) const;

    /// Flat key/value form used by `.adpt` headers and manifests.
    std::map<std::string, std::string> to_map() const;
    static AdapterConfig from_map(const std::map<std::string, std::string>& kv);

    bool operator==(const AdapterConfig&) const = default;
};

/// Divisor of `d` nearest √d (ties go to the smaller divisor).
std::int64_t lokr_auto_factor(std::int64_t d);

/// Factor pair (u_out, u_in) for a LoKr site.
std::pair<std::int64_t, std::int64_t> lokr_factors(const AdapterConfig& c, std::int64_t d_out, std::int64_t d_in);

/// Sites of `model` that an adapter with `c` attaches to, in layer-major order.
std::vector<SiteId> target_sites(const AdapterConfig& c, const ModelConfig& model);

}  // namespace adfg::adapters
