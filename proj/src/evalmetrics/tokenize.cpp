// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/evalmetrics/tokenize.hpp"

namespace adfg::evalmetrics {

namespace {

bool word_byte(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

Tokens metric_tokens(std::string_view text) {
    Tokens out;
    std::string cur;
    for (unsigned char c : text) {
        if (word_byte(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string light_stem(std::string_view word) {
    constexpr std::size_t keep = 3;
    if (ends_with(word, "ies") && word.size() >= keep + 3) return std::string(word.substr(0, word.size() - 3)) + "y";
    for (std::string_view suf : {"ingly", "edly", "ing", "ed", "ly", "es", "s"}) {
        if (!ends_with(word, suf) || word.size() < keep + suf.size()) continue;
        if (suf == "s" && ends_with(word, "ss")) break;
        return std::string(word.substr(0, word.size() - suf.size()));
    }
    return std::string(word);
}

}  // namespace adfg::evalmetrics
