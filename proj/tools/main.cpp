// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "gmae/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gmae::run_cli(args);
}
