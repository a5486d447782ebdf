// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adfg/adapters/config.hpp"
#include "adfg/numerics/tensor.hpp"

namespace adfg::adapters {

using numerics::Tensor;

struct Provenance {
    std::string dataset;
    std::string domain;
    std::string run_id;

    bool operator==(const Provenance&) const = default;
};

/// Named tensors at one site. Trainable parameters use plain names
/// ("A", "B", "Lambda", "U3", ...); bookkeeping tensors carry the "aux."
/// prefix and never receive gradients.
template <typename T>
using SiteTensors = std::map<std::string, Tensor<T>>;

template <typename T>
using SiteMap = std::map<SiteId, SiteTensors<T>>;

inline bool is_trainable_name(const std::string& name) {
    return name.rfind("aux.", 0) != 0;
}

/// One trained (method, dataset) adapter: the unit of composition.
///
/// Per-site tensors by method:
///   lora     A [r×d_in], B [d_out×r]
///   adalora  P [d_out×r], Lambda [r], Q [r×d_in], aux.mask [r], aux.{P,Lambda,Q}.{ibar,ubar}
///   loha     A1, A2 [r×d_in], B1, B2 [d_out×r]
///   lokr     C [u_out×u_in], A [r×(d_in/u_in)], B [(d_out/u_out)×r]
///   ia3      l [d_out]
///   oft      U0..U{n-1} [b×b], one free generator per diagonal block
template <typename T>
struct AdapterState {
    AdapterConfig config;
    ModelConfig model_config;
    Provenance provenance;
    SiteMap<T> sites;
    /// adalora: active budget after the latest schedule step.
    std::int64_t adalora_budget = 0;
    std::int64_t steps_taken = 0;

    const SiteTensors<T>& site(const SiteId& s) const;
    SiteTensors<T>& site(const SiteId& s);
    bool has_site(const SiteId& s) const { return sites.count(s) != 0; }

    std::int64_t trainable_count() const;

    template <typename U>
    AdapterState<U> cast() const;

    bool operator==(const AdapterState&) const = default;
};

/// Method-specific initialization; the delta is exactly zero for every
/// method except ia3 in a non-ones init mode.
template <typename T>
AdapterState<T> init_adapter(const AdapterConfig& config, const ModelConfig& model, std::uint64_t seed);

/// Effective transform at `site`: the weight delta [d_out×d_in] for delta
/// methods (scaling included), the scale vector for ia3 and the block
/// diagonal rotation R [d_out×d_out] for oft.
template <typename T>
Tensor<T> delta(const AdapterState<T>& state, const SiteId& site);

/// Rotation of one oft block, for inspection.
template <typename T>
Tensor<T> oft_block_rotation(const AdapterState<T>& state, const SiteId& site, std::int64_t block);

extern template struct AdapterState<float>;
extern template struct AdapterState<double>;

}  // namespace adfg::adapters
