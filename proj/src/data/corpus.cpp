// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/data/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

#include "adfg/common/error.hpp"

namespace adfg::data {

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::holdout: return "holdout";
    }
    return "?";
}

std::optional<Split> parse_split(std::string_view name) {
    for (Split s : {Split::train, Split::validation, Split::test, Split::holdout}) {
        if (to_string(s) == name) return s;
    }
    if (name == "val") return Split::validation;
    return std::nullopt;
}

namespace {

bool is_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::int64_t count_words(std::string_view text) {
    std::int64_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

Corpus::Corpus(Split split, std::string dataset, std::string domain)
    : split_(split), dataset_(std::move(dataset)), domain_(std::move(domain)) {}

void Corpus::add(Example e) {
    e.article = normalize_whitespace(e.article);
    e.summary = normalize_whitespace(e.summary);
    ADFG_REQUIRE(!e.article.empty() && !e.summary.empty(), ErrorKind::data, "example '" + e.id + "' has an empty field");
    if (e.dataset.empty()) e.dataset = dataset_;
    if (e.domain.empty()) e.domain = domain_;
    if (e.id.empty()) e.id = dataset_ + "-" + std::to_string(examples_.size());
    const auto n = static_cast<double>(examples_.size());
    stats_.mean_article_tokens = (stats_.mean_article_tokens * n + static_cast<double>(count_words(e.article))) / (n + 1);
    stats_.mean_summary_tokens = (stats_.mean_summary_tokens * n + static_cast<double>(count_words(e.summary))) / (n + 1);
    examples_.push_back(std::move(e));
}

void Corpus::recompute_stats() {
    stats_ = {};
    if (examples_.empty()) return;
    double a = 0.0, s = 0.0;
    for (const Example& e : examples_) {
        a += static_cast<double>(count_words(e.article));
        s += static_cast<double>(count_words(e.summary));
    }
    stats_.mean_article_tokens = a / static_cast<double>(examples_.size());
    stats_.mean_summary_tokens = s / static_cast<double>(examples_.size());
}

Corpus Corpus::select(std::int64_t n, std::uint64_t seed, bool shortest_first) const {
    std::vector<std::size_t> order(examples_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    if (shortest_first) {
        std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
            return examples_[a].article.size() < examples_[b].article.size();
        });
    }
    const std::size_t keep = n <= 0 ? order.size() : std::min(order.size(), static_cast<std::size_t>(n));
    Corpus out(split_, dataset_, domain_);
    out.examples_.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) out.examples_.push_back(examples_[order[i]]);
    out.recompute_stats();
    out.skipped_ = skipped_;
    out.selection_ = "kept " + std::to_string(keep) + " of " + std::to_string(examples_.size()) +
                     (shortest_first ? " (shortest articles first" : " (seeded shuffle") +
                     ", seed " + std::to_string(seed) + ")";
    return out;
}

Corpus load_corpus(const std::filesystem::path& path, Split split, const std::string& dataset,
                   const std::string& domain) {
    std::ifstream in(path);
    ADFG_REQUIRE(in.good(), ErrorKind::data, "cannot open corpus: " + path.string());
    Corpus corpus(split, dataset.empty() ? path.stem().string() : dataset, domain);
    std::string line;
    std::int64_t line_no = 0, skipped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_whitespace(line).empty() || line[0] == '#') continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        ADFG_REQUIRE(rec.is_object(), ErrorKind::parse,
                path.string() + ":" + std::to_string(line_no) + ": record is not an object");
        auto text = [&rec](const char* key) -> std::string {
            auto it = rec.find(key);
            if (it == rec.end() || !it->is_string()) return {};
            return normalize_whitespace(it->get<std::string>());
        };
        Example e;
        e.article = text("article");
        e.summary = text("summary");
        if (e.article.empty() || e.summary.empty()) {
            ++skipped;
            continue;
        }
        if (auto it = rec.find("id"); it != rec.end()) e.id = it->is_string() ? it->get<std::string>() : it->dump();
        corpus.add(std::move(e));
    }
    ADFG_REQUIRE(!corpus.empty(), ErrorKind::data, "corpus has no usable records: " + path.string());
    corpus.set_skipped(skipped);
    return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus, const std::string& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    ADFG_REQUIRE(out.good(), ErrorKind::io, "cannot open for writing: " + path.string());
    if (!header.empty()) out << header << '\n';
    for (const Example& e : corpus.examples()) {
        nlohmann::ordered_json rec;
        rec["id"] = e.id;
        rec["article"] = e.article;
        rec["summary"] = e.summary;
        out << rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
    ADFG_REQUIRE(out.good(), ErrorKind::io, "write failed: " + path.string());
}

void require_not_holdout(const Corpus& corpus, std::string_view where) {
    ADFG_REQUIRE(corpus.split() != Split::holdout, ErrorKind::isolation,
            std::string(where) + ": holdout corpus '" + corpus.dataset() + "' may not be used here");
}

}  // namespace adfg::data
