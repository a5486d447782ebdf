// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/common/error.hpp"

namespace adfg {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::dimension: return "dimension error";
        case ErrorKind::singularity: return "singularity error";
        case ErrorKind::numeric: return "numeric error";
        case ErrorKind::config: return "config error";
        case ErrorKind::context: return "context error";
        case ErrorKind::attachment: return "attachment error";
        case ErrorKind::site: return "site error";
        case ErrorKind::composition: return "composition error";
        case ErrorKind::unsupported_merge: return "unsupported-merge error";
        case ErrorKind::input: return "input error";
        case ErrorKind::parse: return "parse error";
        case ErrorKind::decode: return "decode error";
        case ErrorKind::data: return "data error";
        case ErrorKind::io: return "io error";
        case ErrorKind::isolation: return "holdout isolation error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace adfg
