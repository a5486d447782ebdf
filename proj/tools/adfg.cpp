// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "adfg/cli/commands.hpp"

int main(int argc, char** argv) {
    return adfg::cli::run(argc, argv, std::cout, std::cerr);
}
