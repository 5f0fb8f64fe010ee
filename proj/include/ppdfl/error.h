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

#ifndef PPDFL_ERROR_H_
#define PPDFL_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ppdfl {

enum class ErrorCode {
  kNotPrime,
  kModulusTooLarge,
  kModulusMismatch,
  kZeroInverse,
  kDimensionMismatch,
  kNotMember,
  kBadShareholderSet,
  kBadDegree,
  kKeySetMismatch,
  kTooFewShares,
  kOutOfRange,
  kDisconnectedGraph,
  kNotSymmetric,
  kBadParameters,
  kNoFiniteK,
  kBadWeights,
  kMissingBundle,
  kRangeViolation,
  kBoundViolation,
  kTranscriptIncomplete,
  kConfig,
  kIo,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// failure kind so callers (notably the CLI) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ppdfl

#endif  // PPDFL_ERROR_H_
