// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace sglab {

// Subcommands: generate, train, eval, bench, gradcheck, report.
// Exit codes: 0 success, 1 usage error (or failed gradcheck), 2 data/model
// format error.
int run_cli(const std::vector<std::string>& args);

}  // namespace sglab
