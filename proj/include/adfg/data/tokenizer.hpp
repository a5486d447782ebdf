// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adfg::data {

using TokenIds = std::vector<std::int32_t>;

/// Byte-level BPE. Ids 0..255 are raw bytes (so any input encodes), then
/// the special tokens, then one id per learned merge in merge order.
class Tokenizer {
public:
    static constexpr std::int32_t kByteCount = 256;
    static constexpr std::int32_t kBos = 256;
    static constexpr std::int32_t kEos = 257;
    static constexpr std::int32_t kFirstMerge = 258;

    Tokenizer() { build_pieces(); }

    /// Learns merges until the vocabulary reaches `vocab_size` or no pair
    /// occurs at least twice. Ties between equally frequent pairs go to the
    /// lexicographically smallest (left id, right id).
    static Tokenizer train(const std::vector<std::string>& texts, std::int32_t vocab_size);

    TokenIds encode(std::string_view text) const;
    /// Special tokens decode to nothing; ids outside the vocabulary raise ErrorKind::decode.
    std::string decode(const std::vector<std::int32_t>& ids) const;

    std::int32_t vocab_size() const noexcept { return kFirstMerge + static_cast<std::int32_t>(merges_.size()); }
    const std::vector<std::pair<std::int32_t, std::int32_t>>& merges() const noexcept { return merges_; }
    /// Byte string a token id stands for.
    const std::string& piece(std::int32_t id) const;

    /// `header` becomes a leading comment line when non-empty.
    void save(const std::filesystem::path& path, const std::string& header = {}) const;
    static Tokenizer load(const std::filesystem::path& path);
    std::string serialize() const;
    static Tokenizer parse(std::string_view text);

    bool operator==(const Tokenizer& o) const { return merges_ == o.merges_; }

private:
    void add_merge(std::int32_t left, std::int32_t right);
    TokenIds encode_chunk(std::string_view chunk) const;
    void build_pieces();

    std::vector<std::pair<std::int32_t, std::int32_t>> merges_;
    std::map<std::pair<std::int32_t, std::int32_t>, std::int32_t> rank_;
    std::vector<std::string> pieces_;
};

/// Pre-tokenization: letter runs, digit runs and other symbol runs, each
/// taking at most one preceding space; remaining whitespace stays separate.
std::vector<std::string_view> pretokenize(std::string_view text);

}  // namespace adfg::data
