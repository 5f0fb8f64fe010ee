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

// Per-round record of every message the aggregation protocol emits, plus a
// JSON-lines serialization.

#ifndef PPDFL_TRANSCRIPT_H_
#define PPDFL_TRANSCRIPT_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ppdfl/consensus.h"
#include "ppdfl/prime_field.h"
#include "ppdfl/topology.h"

namespace ppdfl {

// Weighted shares from `sender` for `receiver`, one residue per coordinate.
// A self-held bundle has sender == receiver.
struct ShareBundle {
  NodeId sender = 0;
  NodeId receiver = 0;
  std::size_t round = 0;
  std::vector<uint64_t> values;
};

struct StateMessage {
  NodeId from = 0;
  NodeId to = 0;
  std::size_t iteration = 0;
  std::span<const double> payload;
};

struct RoundTranscript {
  std::size_t round = 0;
  RoundTopology topology{1, {}};
  std::size_t k = 0;
  double lambda2 = 0;
  // Ordered by (sender, receiver).
  std::vector<ShareBundle> shares;
  // states[k] holds s(k) for every learner (row i-1 is learner i). Entry 0
  // is the masked initial state; later entries exist only for full
  // transcripts. s(K) is never broadcast and is not stored.
  std::vector<StateMatrix> states;
  // Decoded outputs in units of 10^-sigma, row per learner.
  std::vector<std::vector<int64_t>> decoded_units;
  // Encoded weighted secrets per learner. Audit data, never part of any
  // learner's view.
  std::optional<std::vector<std::vector<uint64_t>>> ground_truth;

  // Every s(k) broadcast recorded for this round, in (k, from, to) order.
  void ForEachStateMessage(
      const std::function<void(const StateMessage&)>& fn) const;
  // Bundles addressed to `receiver`.
  std::vector<const ShareBundle*> BundlesFor(NodeId receiver) const;
};

struct Transcript {
  uint64_t prime = 0;
  int sigma = 0;
  std::size_t n_learners = 0;
  std::size_t model_dim = 0;
  std::vector<RoundTranscript> rounds;
};

// One JSON object per line: a header, then per round a topology record,
// share, initial_state and consensus messages {round, phase, k?, from, to,
// payload}, decoded records and optional audit records.
void WriteTranscriptJsonl(std::ostream& out, const Transcript& transcript);
// Throws kTranscriptIncomplete on malformed or inconsistent input.
Transcript ReadTranscriptJsonl(std::istream& in);

}  // namespace ppdfl

#endif  // PPDFL_TRANSCRIPT_H_
