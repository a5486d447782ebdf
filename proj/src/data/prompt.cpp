// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/data/prompt.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "adfg/common/error.hpp"

namespace adfg::data {

const std::vector<PromptSpec>& builtin_prompts() {
    static const std::vector<PromptSpec> prompts = [] {
        std::vector<PromptSpec> p(4);
        p[0].domain = "scientific";
        p[0].instruction =
            "Summarize the provided scientific article in a clear and concise paragraph. Include the study’s "
            "objective, background, methodology, key findings, and conclusions, ensuring the summary represents the "
            "article’s essence.";
        p[1].domain = "medical";
        p[1].instruction =
            "Provide a cohesive summary of the given medical article in one paragraph. Highlight the study’s "
            "objective, background, methods, major conclusions, and potential clinical implications in a clear and "
            "professional manner.";
        p[2].domain = "legal";
        p[2].instruction =
            "Generate a concise paragraph summarizing the provided legal case study. Address the background, legal "
            "questions, key arguments, rulings, and any significant precedents, ensuring clarity and accuracy.";
        p[3].domain = "news";
        p[3].instruction =
            "Create a clear and concise summary of the given news article in one paragraph. Focus on the main event, "
            "its context, key details, and broader implications, presenting the information in an informative "
            "manner.";
        return p;
    }();
    return prompts;
}

std::optional<PromptSpec> builtin_prompt(std::string_view domain) {
    for (const PromptSpec& p : builtin_prompts()) {
        if (p.domain == domain) return p;
    }
    return std::nullopt;
}

std::string build_prompt(const PromptSpec& spec, std::string_view article, const std::vector<Example>& shots) {
    ADFG_REQUIRE(spec.k >= 0, ErrorKind::input, "prompt: k must be >= 0");
    ADFG_REQUIRE(shots.size() == static_cast<std::size_t>(spec.k), ErrorKind::input,
            "prompt: expected " + std::to_string(spec.k) + " exemplars, got " + std::to_string(shots.size()));
    std::string out = spec.instruction;
    for (const Example& e : shots) {
        out += spec.separator;
        out += spec.article_label + " " + e.article + "\n" + spec.summary_label + " " + e.summary;
    }
    out += spec.separator;
    out += spec.article_label + " " + std::string(article) + "\n" + spec.summary_label;
    return out;
}

std::vector<Example> pick_shots(const Corpus& pool, std::int32_t k, std::uint64_t seed, std::string_view exclude_id) {
    ADFG_REQUIRE(k >= 0, ErrorKind::input, "few-shot k must be >= 0");
    require_not_holdout(pool, "few-shot exemplar pool");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (exclude_id.empty() || pool[i].id != exclude_id) idx.push_back(i);
    }
    ADFG_REQUIRE(idx.size() >= static_cast<std::size_t>(k), ErrorKind::data,
            "exemplar pool has " + std::to_string(idx.size()) + " examples, " + std::to_string(k) + " requested");
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<Example> out;
    for (std::int32_t i = 0; i < k; ++i) out.push_back(pool[idx[static_cast<std::size_t>(i)]]);
    return out;
}

}  // namespace adfg::data
