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

#include "ppdfl/error.h"

namespace ppdfl {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotPrime: return "NotPrime";
    case ErrorCode::kModulusTooLarge: return "ModulusTooLarge";
    case ErrorCode::kModulusMismatch: return "ModulusMismatch";
    case ErrorCode::kZeroInverse: return "ZeroInverse";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotMember: return "NotMember";
    case ErrorCode::kBadShareholderSet: return "BadShareholderSet";
    case ErrorCode::kBadDegree: return "BadDegree";
    case ErrorCode::kKeySetMismatch: return "KeySetMismatch";
    case ErrorCode::kTooFewShares: return "TooFewShares";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kBadParameters: return "BadParameters";
    case ErrorCode::kNoFiniteK: return "NoFiniteK";
    case ErrorCode::kBadWeights: return "BadWeights";
    case ErrorCode::kMissingBundle: return "MissingBundle";
    case ErrorCode::kRangeViolation: return "RangeViolation";
    case ErrorCode::kBoundViolation: return "BoundViolation";
    case ErrorCode::kTranscriptIncomplete: return "TranscriptIncomplete";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInternal: return "InternalError";
  }
  return "Unknown";
}

}  // namespace ppdfl
