// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adfg {

enum class ErrorKind {
    dimension,
    singularity,
    numeric,
    config,
    context,
    attachment,
    site,
    composition,
    unsupported_merge,
    input,
    parse,
    decode,
    data,
    io,
    isolation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        fail(kind, message);
    }
}

}  // namespace adfg

/// Like require() but builds the message only when the check fails; use on hot paths.
#define ADFG_REQUIRE(condition, kind, message)         \
    do {                                               \
        if (!(condition)) ::adfg::fail(kind, message); \
    } while (false)
