// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adfg/adapters/config.hpp"
#include "adfg/data/corpus.hpp"
#include "adfg/data/prompt.hpp"
#include "adfg/model/config.hpp"
#include "adfg/training/pretrain.hpp"
#include "adfg/training/train.hpp"

namespace adfg::cli {

namespace fs = std::filesystem;

struct CorpusEntry {
    std::string id;
    std::string domain;
    /// Name of a [prompt.<name>] section or a built-in domain prompt.
    std::string prompt;
    std::map<data::Split, fs::path> files;
    bool has(data::Split s) const { return files.count(s) != 0; }
};

/// One experiment as an INI document. Relative paths resolve against the
/// manifest's directory.
///
///   [experiment]  seed, model, tokenizer, out, adapter_preset (desk|reference),
///                 metrics, threads, tokenizer_vocab
///   [model]       ModelConfig fields for `prepare`
///   [train]       TrainConfig fields; optimizer = sgd|adamw, weight_decay
///   [pretrain]    PretrainConfig fields
///   [adapter]     AdapterConfig overrides applied to every method
///   [generation]  max_new_tokens, perplexity
///   [corpus.<id>] domain, prompt, train, validation, test, holdout
///   [prompt.<n>]  domain, instruction
///   [adapters]    <id> = <file>
struct ExperimentManifest {
    fs::path path;
    fs::path base_dir;
    std::uint64_t hash = 0;
    std::uint64_t seed = 0;
    fs::path model;
    fs::path tokenizer;
    fs::path out;
    std::string adapter_preset = "desk";
    std::map<std::string, std::string> adapter_overrides;
    std::vector<std::string> metrics;
    std::int32_t threads = 0;
    /// 0: the model vocabulary size.
    std::int32_t tokenizer_vocab = 0;
    model::ModelConfig model_config = model::ModelConfig::desk();
    training::TrainConfig train;
    training::PretrainConfig pretrain;
    std::int32_t max_new_tokens = 48;
    bool perplexity = true;
    std::map<std::string, CorpusEntry> corpora;
    std::map<std::string, data::PromptSpec> prompts;
    std::map<std::string, fs::path> adapters;

    /// Parses and validates; unknown keys and sections are config errors,
    /// missing corpus files are data errors.
    static ExperimentManifest load(const fs::path& path);
    static ExperimentManifest parse(const std::string& text, const fs::path& base_dir);

    /// Provenance line for emitted files.
    std::string header() const;

    const CorpusEntry& corpus(const std::string& id) const;
    data::Corpus load_split(const std::string& id, data::Split split) const;
    data::PromptSpec prompt_for(const CorpusEntry& entry) const;
    /// Preset for `method` with the [adapter] overrides applied.
    adapters::AdapterConfig adapter_config(adapters::Method method) const;
    /// Registered path for `id`, else `<out>/adapters/<id>.adpt`; `id` may also be a path.
    fs::path adapter_file(const std::string& id) const;
    static std::string adapter_id(const std::string& dataset, adapters::Method method);
    std::vector<std::string> datasets_in(const std::string& domain) const;
};

}  // namespace adfg::cli
