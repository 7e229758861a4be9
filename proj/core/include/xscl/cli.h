// core/include/xscl/cli.h

// Copyright 2026  XSCL Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XSCL_CLI_H_
#define XSCL_CLI_H_

#include <string>
#include <vector>

namespace xscl {

// Command-line entry point (subcommands: synth, train, analyze, report).
// Exit codes: 0 success, 1 internal error, 2 invalid input.
int run_cli(const std::vector<std::string> &args);

}  // namespace xscl

#endif  // XSCL_CLI_H_
