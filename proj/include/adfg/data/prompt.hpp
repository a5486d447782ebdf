// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adfg/data/corpus.hpp"

namespace adfg::data {

struct PromptSpec {
    std::string domain;
    std::string instruction;
    std::int32_t k = 0;
    std::string article_label = "Article:";
    std::string summary_label = "Summary:";
    /// Between the instruction and each exemplar block.
    std::string separator = "\n\n";

    bool operator==(const PromptSpec&) const = default;
};

/// Domain prompts used by the reference runs: medical, scientific, legal, news.
const std::vector<PromptSpec>& builtin_prompts();
std::optional<PromptSpec> builtin_prompt(std::string_view domain);

/// instruction, then k "Article: …\nSummary: …" exemplars, then the target
/// article and a bare summary cue. Throws ErrorKind::input unless |shots| = k.
std::string build_prompt(const PromptSpec& spec, std::string_view article, const std::vector<Example>& shots);

/// k exemplars drawn without replacement from `pool` with a seeded generator,
/// skipping any example whose id equals `exclude_id`.
std::vector<Example> pick_shots(const Corpus& pool, std::int32_t k, std::uint64_t seed,
                                std::string_view exclude_id = {});

}  // namespace adfg::data
