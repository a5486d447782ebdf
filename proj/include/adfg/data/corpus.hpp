// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adfg::data {

enum class Split : std::uint8_t { train, validation, test, holdout };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view name);

struct Example {
    std::string article;
    std::string summary;
    std::string id;
    std::string dataset;
    std::string domain;

    bool operator==(const Example&) const = default;
};

struct CorpusStats {
    double mean_article_tokens = 0.0;
    double mean_summary_tokens = 0.0;
};

/// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);
/// Whitespace-delimited token count, used for corpus statistics.
std::int64_t count_words(std::string_view text);

/// Ordered examples of one split. Stats are kept current by every mutator.
class Corpus {
public:
    Corpus() = default;
    Corpus(Split split, std::string dataset, std::string domain);

    Split split() const noexcept { return split_; }
    const std::string& dataset() const noexcept { return dataset_; }
    const std::string& domain() const noexcept { return domain_; }
    const std::vector<Example>& examples() const noexcept { return examples_; }
    const CorpusStats& stats() const noexcept { return stats_; }
    std::size_t size() const noexcept { return examples_.size(); }
    bool empty() const noexcept { return examples_.empty(); }
    const Example& operator[](std::size_t i) const { return examples_.at(i); }

    /// Records skipped at load time (missing or empty fields).
    std::int64_t skipped() const noexcept { return skipped_; }
    /// Free-form notes on how the example set was selected (cap, shuffle seed, order).
    const std::string& selection_note() const noexcept { return selection_; }

    /// Normalizes and appends; empty article or summary is rejected with ErrorKind::data.
    void add(Example e);
    void set_skipped(std::int64_t n) { skipped_ = n; }
    void set_selection_note(std::string note) { selection_ = std::move(note); }

    /// First `n` examples after a seeded shuffle, or the `n` shortest articles
    /// when `shortest_first` is set. n ≤ 0 keeps everything (still shuffled).
    Corpus select(std::int64_t n, std::uint64_t seed, bool shortest_first = false) const;

    bool operator==(const Corpus& o) const { return split_ == o.split_ && examples_ == o.examples_; }

private:
    void recompute_stats();

    Split split_ = Split::train;
    std::string dataset_;
    std::string domain_;
    std::vector<Example> examples_;
    CorpusStats stats_;
    std::int64_t skipped_ = 0;
    std::string selection_;
};

/// Record-per-line UTF-8: one JSON object per line with `article`,
/// `summary` and an optional `id`. Malformed lines raise ErrorKind::parse
/// with the line number; lines starting with '#' are comments; records with a missing or empty field are skipped
/// and counted; a file without usable records raises ErrorKind::data.
Corpus load_corpus(const std::filesystem::path& path, Split split, const std::string& dataset = {},
                   const std::string& domain = {});
/// `header` becomes a leading '#' comment line when non-empty; the loader skips such lines.
void save_corpus(const std::filesystem::path& path, const Corpus& corpus, const std::string& header = {});

/// Hard error when a holdout corpus reaches a training or checkpoint-selection path.
void require_not_holdout(const Corpus& corpus, std::string_view where);

}  // namespace adfg::data
