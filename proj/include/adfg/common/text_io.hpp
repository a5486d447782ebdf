// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adfg {

inline constexpr std::string_view kVersion = "0.3.0";

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 1469598103934665603ULL);
std::string hex64(std::uint64_t v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// First line of every emitted file: tool version, seed and manifest hash.
std::string provenance_header(std::uint64_t seed, std::uint64_t manifest_hash);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);
/// "54525952" -> "54,525,952".
std::string with_thousands(std::int64_t v);
/// Fixed-point formatting without iostream state juggling at call sites.
std::string fixed(double v, int decimals);

}  // namespace adfg
