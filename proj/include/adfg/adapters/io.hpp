// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "adfg/adapters/state.hpp"

namespace adfg::adapters {

/// `.adpt` files: the model checkpoint container with the adapter config and
/// provenance in the key/value header and per-site tensors named
/// "layers.<n>.<site>/<tensor>".
/// `header` (e.g. a provenance line) is stored under the "header" key when non-empty.
void save_adapter(const std::filesystem::path& path, const AdapterState<float>& state,
                  const std::string& header = {});
AdapterState<float> load_adapter(const std::filesystem::path& path);

}  // namespace adfg::adapters
