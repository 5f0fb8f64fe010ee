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

// Round driver for privacy-preserving decentralized aggregation: secret
// sharing of weighted models, masked initial states, average consensus and
// modular reconstruction.

#ifndef PPDFL_PROTOCOL_H_
#define PPDFL_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ppdfl/config.h"
#include "ppdfl/consensus.h"
#include "ppdfl/fixed_point.h"
#include "ppdfl/prime_field.h"
#include "ppdfl/rng.h"
#include "ppdfl/topology.h"
#include "ppdfl/transcript.h"

namespace ppdfl {

struct LearnerState {
  NodeId id = 0;
  std::vector<double> initial_model;  // theta_i^(t,0)
  std::vector<double> local_model;    // theta_i^(t)
  // trunc(10^sigma * w_i * theta_il) mod p per coordinate.
  std::vector<uint64_t> encoded;
  std::vector<FieldElement> initial_state;  // s_i(0)
};

// (learner id, round, initial model, private stream) -> local model.
using TrainerHook = std::function<std::vector<double>(
    NodeId, std::size_t, std::span<const double>, DeterministicRng&)>;

// Initial model plus uniform noise in [-noise, noise], clamped to
// [-theta_max, theta_max].
TrainerHook SyntheticTrainer(double theta_max, double noise);
TrainerHook ConstantTrainer();
TrainerHook MakeTrainer(const ProtocolConfig& cfg);

// Coordinate-wise sum of the bundles addressed to `receiver`. Requires
// exactly one bundle from each member of the closed neighborhood; throws
// kMissingBundle naming the absent sender.
std::vector<FieldElement> BuildInitialState(
    std::span<const ShareBundle* const> received, NodeId receiver,
    const RoundTopology& g, PrimeModulus p, std::size_t model_dim);

struct RoundParams {
  std::size_t round = 1;
  PrimeModulus prime{2};
  Precision precision{0};
  std::vector<double> weights;
  double theta_max = 0;
  uint64_t seed = 0;
  std::size_t k = 1;
  TranscriptLevel transcript = TranscriptLevel::kFull;
  std::vector<std::size_t> trajectory_coordinates{0};
};

struct PhaseTimings {
  double weights = 0;
  double shares = 0;
  double initial_state = 0;
  double consensus = 0;
  double reconstruct = 0;

  double total() const {
    return weights + shares + initial_state + consensus + reconstruct;
  }
  PhaseTimings& operator+=(const PhaseTimings& o);
};

struct RoundResult {
  std::size_t round = 0;
  std::size_t k = 0;
  double lambda2 = 0;
  std::vector<std::vector<int64_t>> decoded_units;  // per learner
  std::vector<int64_t> oracle_units;
  int64_t max_deviation_units = 0;
  bool agreement = false;
  // max over learners and coordinates of |N s_i(K) - sum_j s_j(0)|.
  double rounding_margin = 0;
  PhaseTimings timings;
  // Snapshots k = 0..K restricted to the trajectory coordinates, in that
  // column order.
  Trajectory trajectory;
  std::vector<std::size_t> trajectory_coordinates;
  RoundTranscript transcript;

  std::vector<double> DecodedModel(NodeId i, const Precision& prec) const;
};

// Sum over learners of trunc(10^sigma * w_i * theta_il), per coordinate.
std::vector<int64_t> QuantizedOracle(
    const std::vector<std::vector<double>>& models,
    std::span<const double> weights, const Precision& prec);

// Runs one aggregation round over connected `g`. Throws kDisconnectedGraph,
// kRangeViolation when a model coordinate exceeds theta_max or its encoding
// leaves the signed range, and kDimensionMismatch on ragged input.
RoundResult ExecuteRound(const std::vector<std::vector<double>>& local_models,
                         const RoundTopology& g, const RoundParams& params);

struct TrainingResult {
  std::vector<RoundResult> rounds;
  std::vector<std::vector<int64_t>> global_units;  // per round
  Transcript transcript;
  PhaseTimings timings;

  int64_t max_deviation_units() const;
  double max_rounding_margin() const;
  bool all_agree() const;
};

// K for round t under the configured policy. Fixed K throws
// kBoundViolation when the iteration bound fails on that round's graph.
std::size_t ChooseIterations(const ProtocolConfig& cfg, const WeightMatrix& a,
                             std::size_t global_k);
// max over the first `rounds` graphs of the minimal K.
std::size_t ScheduleIterations(const TopologySchedule& schedule,
                               std::size_t rounds, PrimeModulus p);

std::vector<std::vector<double>> InitialModels(const ProtocolConfig& cfg);

TrainingResult RunTraining(const ProtocolConfig& cfg,
                           const TrainerHook& trainer,
                           const TopologySchedule& schedule);
TrainingResult RunTraining(const ProtocolConfig& cfg);

struct ReplayReport {
  bool matches = true;
  std::size_t rounds_checked = 0;
  std::vector<std::string> mismatches;
};

// Recomputes s(0) from recorded shares (when present), reruns consensus
// from the recorded s(0) and checks the decoded outputs. Throws
// kTranscriptIncomplete if initial states are absent.
ReplayReport ReplayTranscript(const Transcript& transcript);

// CSV rows "round,iteration,learner_id,coordinate,value".
void WriteRoundTrajectoryCsv(std::ostream& out, const RoundResult& r);
// CSV rows "round,learner_id,coordinate,value" with sigma-digit values.
void WriteDecodedCsv(std::ostream& out, const RoundResult& r,
                     const Precision& prec);

}  // namespace ppdfl

#endif  // PPDFL_PROTOCOL_H_
