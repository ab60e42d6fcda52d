// Copyright 2026 The mmrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iostream>

namespace mmrs {

/// Exit status per failure class, so scripts can tell them apart.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitInvalidArgument = 3,
  kExitMalformedFile = 4,
  kExitChainViolation = 5,
  kExitEmptyOmega = 6,
  kExitSchemaMismatch = 7,
  kExitCorruptModel = 8,
  kExitIo = 9,
};

/// Entry point of the `mmrs` tool: simulate, train, predict, evaluate, tune, benchmark.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace mmrs
