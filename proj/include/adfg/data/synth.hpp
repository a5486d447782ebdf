// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adfg/data/corpus.hpp"
#include "adfg/data/prompt.hpp"

namespace adfg::data {

/// Sizes of the word lists each synthetic domain owns exclusively.
struct SynthVocabSpec {
    std::int32_t entities = 10;
    std::int32_t verbs = 8;
    std::int32_t objects = 12;
    std::int32_t units = 4;
    std::int32_t settings = 6;
    std::int32_t fillers = 40;
};

struct SynthConfig {
    std::uint64_t seed = 7;
    std::int32_t domains = 3;
    SynthVocabSpec vocab;
    /// Probability that a filler word is borrowed from another domain.
    double mixing = 0.05;
    std::int32_t filler_sentences = 3;
    std::int32_t train_size = 200;
    std::int32_t validation_size = 50;
    std::int32_t test_size = 50;
    std::int32_t holdout_size = 100;
};

/// The facts an article is built around; the summary is a fixed rendering of them.
struct SynthFacts {
    std::string entity;
    std::string verb;
    std::string object;
    std::int32_t quantity = 0;
    std::string unit;
    std::string setting;

    bool operator==(const SynthFacts&) const = default;
};

struct SynthLexicon {
    std::vector<std::string> entities, verbs, objects, units, settings, fillers;
};

struct SynthDomain {
    std::string name;
    SynthLexicon lexicon;
    PromptSpec prompt;
    Corpus train;
    Corpus validation;
    Corpus test;
    Corpus holdout;
};

/// Shared function words every domain draws from.
const std::vector<std::string>& synth_core_vocabulary();

/// Domain names in generation order: scientific, medical, legal, news, then domain4, domain5, ...
std::string synth_domain_name(std::int32_t index);

/// Deterministic per seed. Requires at least two domains.
std::vector<SynthDomain> synth_domains(const SynthConfig& config);

std::string render_summary(const SynthFacts& facts);
/// Recovers the facts from an article produced for `lexicon`; nullopt when
/// the key sentences are absent.
std::optional<SynthFacts> extract_facts(const SynthLexicon& lexicon, const std::string& article);

}  // namespace adfg::data
