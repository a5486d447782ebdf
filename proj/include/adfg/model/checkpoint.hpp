// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "adfg/model/config.hpp"
#include "adfg/model/transformer.hpp"

namespace adfg::model {

inline constexpr std::uint32_t kContainerVersion = 1;

/// On-disk layout (little-endian):
///   "ADFG" | u32 version | 8 × i32 ModelConfig fields
///   u32 n_meta  | n_meta × (u32 len, key bytes, u32 len, value bytes)
///   u32 n_tensors | n_tensors × (u32 len, name, u32 rank, rank × i32 dims, f32 data)
/// Model checkpoints and `.adpt` adapter files share the layout.
struct TensorContainer {
    ModelConfig config;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;

    const std::string* find_meta(const std::string& key) const;
    const Tensor<float>* find_tensor(const std::string& name) const;
};

void write_container(const std::filesystem::path& path, const TensorContainer& c);
TensorContainer read_container(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const TransformerModel& model,
                std::vector<std::pair<std::string, std::string>> metadata = {});
TransformerModel load_model(const std::filesystem::path& path);

}  // namespace adfg::model
