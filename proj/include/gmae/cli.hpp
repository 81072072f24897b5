// Copyright Contributors to the gmae project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace gmae {

// Entry point behind the gmae_cli binary, callable in-process for tests.
// args excludes argv[0].
//
// Exit codes:
//   0  success
//   1  unexpected runtime failure
//   2  unknown flag / malformed command line
//   3  invalid configuration value
//   4  missing or unreadable input file (images, configs, checkpoints)
int run_cli(const std::vector<std::string>& args);

}  // namespace gmae
