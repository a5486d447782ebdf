// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "adfg/adapters/config.hpp"
#include "adfg/common/error.hpp"
#include "adfg/data/synth.hpp"
#include "adfg/model/config.hpp"

namespace adfg::cli {

namespace fs = std::filesystem;

/// 2 configuration, 3 missing or invalid data, 4 numeric failure.
int exit_code(ErrorKind kind);

/// "WID" when every adapter comes from the holdout's domain, "CD" when none
/// does, "mixed" otherwise.
std::string setting_tag(const std::vector<std::string>& adapter_domains, const std::string& holdout_domain);

/// One row per method: trainable count with thousands separators and percentage.
std::string params_table(const std::vector<adapters::Method>& methods, const model::ModelConfig& model,
                         const std::string& preset);

struct ReplayResult {
    std::string text;
    std::int64_t datasets = 0;
    std::int64_t compared = 0;
    std::int64_t rank_matches = 0;
    std::int64_t top1_matches = 0;
};

/// Ranks every score file; with a reference table ("dataset,...,top1")
/// also compares per-method ranks and the top-1 candidate.
ReplayResult replay_benchmark(const std::vector<fs::path>& score_files, const fs::path& reference = {});

/// Manifest text for a directory written by `synth`.
std::string synth_manifest(const data::SynthConfig& config, const std::vector<data::SynthDomain>& domains);

/// Writes corpora and `manifest.ini` under `dir`; returns the manifest path.
fs::path write_synth_experiment(const fs::path& dir, const data::SynthConfig& config);

/// Entry point of the `adfg` tool.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adfg::cli
