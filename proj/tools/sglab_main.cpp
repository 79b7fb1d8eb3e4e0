// Copyright 2026 sglab authors
// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "sglab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sglab::run_cli(args);
}
