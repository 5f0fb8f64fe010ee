/*
 * Copyright 2026 The ppdfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PPDFL_CLI_H_
#define PPDFL_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ppdfl/error.h"
#include "ppdfl/topology.h"

namespace ppdfl {

inline constexpr char kVersion[] = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitBound = 3,
  kExitLeakage = 4,
  kExitInternal = 5,
};

int ExitCodeFor(ErrorCode code);

// 64-bit FNV-1a over the canonical edge lists of rounds 1..rounds.
uint64_t ScheduleDigest(const TopologySchedule& schedule, std::size_t rounds);

// Entry point for the `ppdfl` tool: simulate | spectral | bounds | privacy |
// bench. Never throws; failures map to exit codes.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace ppdfl

#endif  // PPDFL_CLI_H_
