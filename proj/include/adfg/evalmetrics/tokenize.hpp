// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adfg::evalmetrics {

using Tokens = std::vector<std::string>;

/// Lowercased runs of ASCII letters and digits; bytes >= 0x80 count as
/// letters so UTF-8 words stay whole. Everything else separates tokens.
Tokens metric_tokens(std::string_view text);

/// Light suffix stripper: "ies" -> "y", then one of "ingly", "edly", "ing",
/// "ed", "ly", "es", "s" (not after "s"), keeping at least three characters.
std::string light_stem(std::string_view word);

}  // namespace adfg::evalmetrics
