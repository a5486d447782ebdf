// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/data/tokenizer.hpp"

#include <limits>
#include <sstream>
#include <unordered_map>

#include "adfg/common/error.hpp"
#include "adfg/common/text_io.hpp"

namespace adfg::data {
namespace {

enum class CharClass { space, letter, digit, other };

CharClass classify(unsigned char c) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return CharClass::space;
    if (c >= '0' && c <= '9') return CharClass::digit;
    // bytes >= 0x80 belong to multi-byte UTF-8 sequences; treat them as letters
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80) return CharClass::letter;
    return CharClass::other;
}

constexpr std::string_view kHeader = "# adfg-bpe v1";

}  // namespace

std::vector<std::string_view> pretokenize(std::string_view text) {
    std::vector<std::string_view> out;
    const std::size_t n = text.size();
    auto cls_at = [&text](std::size_t i) { return classify(static_cast<unsigned char>(text[i])); };
    std::size_t i = 0;
    while (i < n) {
        const std::size_t start = i;
        if (cls_at(i) == CharClass::space) {
            std::size_t j = i;
            while (j < n && cls_at(j) == CharClass::space) ++j;
            // a single space directly before a word travels with that word
            const bool leading = j < n && text[j - 1] == ' ';
            if (!leading || j - 1 > i) {
                const std::size_t end = leading ? j - 1 : j;
                out.push_back(text.substr(start, end - start));
                i = end;
                continue;
            }
            ++i;
        }
        const CharClass cls = cls_at(i);
        while (i < n && cls_at(i) == cls) ++i;
        out.push_back(text.substr(start, i - start));
    }
    return out;
}

void Tokenizer::add_merge(std::int32_t left, std::int32_t right) {
    const auto id = static_cast<std::int32_t>(kFirstMerge + merges_.size());
    merges_.emplace_back(left, right);
    rank_.emplace(std::make_pair(left, right), id);
}

void Tokenizer::build_pieces() {
    pieces_.assign(static_cast<std::size_t>(vocab_size()), std::string());
    for (std::int32_t b = 0; b < kByteCount; ++b) pieces_[static_cast<std::size_t>(b)] = std::string(1, static_cast<char>(b));
    for (std::size_t m = 0; m < merges_.size(); ++m) {
        const auto [l, r] = merges_[m];
        pieces_[kFirstMerge + m] = pieces_[static_cast<std::size_t>(l)] + pieces_[static_cast<std::size_t>(r)];
    }
}

const std::string& Tokenizer::piece(std::int32_t id) const {
    ADFG_REQUIRE(id >= 0 && id < vocab_size(), ErrorKind::decode, "unknown token id " + std::to_string(id));
    return pieces_[static_cast<std::size_t>(id)];
}

Tokenizer Tokenizer::train(const std::vector<std::string>& texts, std::int32_t vocab_size) {
    ADFG_REQUIRE(vocab_size >= kFirstMerge, ErrorKind::config,
            "tokenizer vocabulary must hold at least " + std::to_string(kFirstMerge) + " entries");
    std::unordered_map<std::string, std::int64_t> counts;
    for (const std::string& t : texts) {
        for (std::string_view w : pretokenize(t)) ++counts[std::string(w)];
    }
    // deterministic word order regardless of hash iteration
    std::map<std::string, std::int64_t> ordered(counts.begin(), counts.end());
    std::vector<std::pair<TokenIds, std::int64_t>> words;
    words.reserve(ordered.size());
    for (const auto& [w, c] : ordered) {
        TokenIds ids;
        for (unsigned char b : w) ids.push_back(b);
        words.emplace_back(std::move(ids), c);
    }

    Tokenizer tok;
    while (tok.vocab_size() < vocab_size) {
        std::map<std::pair<std::int32_t, std::int32_t>, std::int64_t> pairs;
        for (const auto& [ids, c] : words) {
            for (std::size_t i = 0; i + 1 < ids.size(); ++i) pairs[{ids[i], ids[i + 1]}] += c;
        }
        std::pair<std::int32_t, std::int32_t> best{};
        std::int64_t best_count = 1;
        for (const auto& [p, c] : pairs) {
            if (c > best_count) {
                best = p;
                best_count = c;
            }
        }
        if (best_count < 2) break;
        const std::int32_t id = tok.vocab_size();
        tok.add_merge(best.first, best.second);
        for (auto& [ids, c] : words) {
            TokenIds next;
            next.reserve(ids.size());
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (i + 1 < ids.size() && ids[i] == best.first && ids[i + 1] == best.second) {
                    next.push_back(id);
                    ++i;
                } else {
                    next.push_back(ids[i]);
                }
            }
            ids = std::move(next);
        }
    }
    tok.build_pieces();
    return tok;
}

TokenIds Tokenizer::encode_chunk(std::string_view chunk) const {
    TokenIds ids;
    ids.reserve(chunk.size());
    for (unsigned char b : chunk) ids.push_back(b);
    while (ids.size() > 1) {
        std::int32_t best_id = std::numeric_limits<std::int32_t>::max();
        std::size_t best_pos = 0;
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
            auto it = rank_.find({ids[i], ids[i + 1]});
            if (it != rank_.end() && it->second < best_id) {
                best_id = it->second;
                best_pos = i;
            }
        }
        if (best_id == std::numeric_limits<std::int32_t>::max()) break;
        const auto [l, r] = merges_[static_cast<std::size_t>(best_id - kFirstMerge)];
        TokenIds next;
        next.reserve(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i >= best_pos && i + 1 < ids.size() && ids[i] == l && ids[i + 1] == r) {
                next.push_back(best_id);
                ++i;
            } else {
                next.push_back(ids[i]);
            }
        }
        ids = std::move(next);
    }
    return ids;
}

TokenIds Tokenizer::encode(std::string_view text) const {
    TokenIds out;
    for (std::string_view chunk : pretokenize(text)) {
        const TokenIds ids = encode_chunk(chunk);
        out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
}

std::string Tokenizer::decode(const std::vector<std::int32_t>& ids) const {
    std::string out;
    for (std::int32_t id : ids) {
        if (id == kBos || id == kEos) continue;
        out += piece(id);
    }
    return out;
}

std::string Tokenizer::serialize() const {
    std::ostringstream ss;
    ss << kHeader << '\n';
    ss << "bytes " << kByteCount << '\n';
    ss << "special " << kBos << " <bos>\n";
    ss << "special " << kEos << " <eos>\n";
    ss << "merges " << merges_.size() << '\n';
    for (const auto& [l, r] : merges_) ss << l << ' ' << r << '\n';
    return ss.str();
}

Tokenizer Tokenizer::parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    // leading comment lines (e.g. a provenance line) precede the format header
    bool found = false;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t == kHeader) {
            found = true;
            break;
        }
        if (!t.empty() && t[0] != '#') break;
    }
    ADFG_REQUIRE(found, ErrorKind::parse, "tokenizer file: missing header");
    std::string word;
    std::int64_t value = 0;
    auto expect = [&](const char* key) {
        ADFG_REQUIRE(static_cast<bool>(std::getline(in, line)), ErrorKind::parse, std::string("tokenizer file: missing ") + key);
        std::istringstream ls(line);
        ls >> word >> value;
        ADFG_REQUIRE(word == key && !ls.fail(), ErrorKind::parse, "tokenizer file: expected '" + std::string(key) + "'");
        return value;
    };
    ADFG_REQUIRE(expect("bytes") == kByteCount, ErrorKind::parse, "tokenizer file: base vocabulary must be 256 bytes");
    ADFG_REQUIRE(expect("special") == kBos, ErrorKind::parse, "tokenizer file: unexpected <bos> id");
    ADFG_REQUIRE(expect("special") == kEos, ErrorKind::parse, "tokenizer file: unexpected <eos> id");
    const std::int64_t n = expect("merges");
    Tokenizer tok;
    for (std::int64_t i = 0; i < n; ++i) {
        ADFG_REQUIRE(static_cast<bool>(std::getline(in, line)), ErrorKind::parse, "tokenizer file: truncated merge list");
        std::istringstream ls(line);
        std::int32_t l = 0, r = 0;
        ls >> l >> r;
        ADFG_REQUIRE(!ls.fail(), ErrorKind::parse, "tokenizer file: bad merge line '" + line + "'");
        const std::int32_t limit = tok.vocab_size();
        ADFG_REQUIRE(l >= 0 && r >= 0 && l < limit && r < limit && l != kBos && l != kEos && r != kBos && r != kEos,
                ErrorKind::parse, "tokenizer file: merge refers to an unknown id: '" + line + "'");
        tok.add_merge(l, r);
    }
    tok.build_pieces();
    return tok;
}

void Tokenizer::save(const std::filesystem::path& path, const std::string& header) const {
    write_text_file(path, header.empty() ? serialize() : header + "\n" + serialize());
}

Tokenizer Tokenizer::load(const std::filesystem::path& path) {
    return parse(read_text_file(path));
}

}  // namespace adfg::data
