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

// Surrounded benign subsets, the perfect-secrecy verdict over a schedule and
// a GF(p) inference engine for a semi-honest coalition.

#ifndef PPDFL_PRIVACY_H_
#define PPDFL_PRIVACY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppdfl/topology.h"
#include "ppdfl/transcript.h"

namespace ppdfl {

class AdversarySet {
 public:
  // Throws kBadParameters on ids outside [1, n], duplicates, or A == V.
  AdversarySet(std::vector<NodeId> adversaries, std::size_t n_learners);
  // Comma-separated ids; empty text is the empty coalition.
  static AdversarySet Parse(const std::string& text, std::size_t n_learners);

  const std::vector<NodeId>& adversaries() const { return adversaries_; }
  const std::vector<NodeId>& benign() const { return benign_; }
  bool IsAdversarial(NodeId i) const { return flags_[i - 1]; }
  std::size_t n_learners() const { return flags_.size(); }
  // Position of benign learner i in benign(), or npos.
  std::size_t BenignIndex(NodeId i) const;

 private:
  std::vector<NodeId> adversaries_;
  std::vector<NodeId> benign_;
  std::vector<bool> flags_;
};

struct SurroundedDecomposition {
  std::vector<std::vector<NodeId>> sets;  // sorted, ordered by first member
  // boundary[s][m]: member m of set s has an adversarial neighbor.
  std::vector<std::vector<bool>> boundary;

  bool is_single_set() const { return sets.size() == 1; }
};

// Connected components of the benign-induced subgraph.
SurroundedDecomposition SurroundedComponents(const RoundTopology& g,
                                             const AdversarySet& adv);

// Every nonempty benign subset that is connected and has no benign neighbor
// outside itself, by exhaustive enumeration. Throws kBadParameters for more
// than 20 benign learners.
std::vector<std::vector<NodeId>> LiteralSurroundedSets(const RoundTopology& g,
                                                       const AdversarySet& adv);

struct SecrecyVerdict {
  bool perfect_secrecy = true;
  std::optional<std::size_t> earliest_failing_round;
  // Proper surrounded subsets of the earliest failing round.
  std::vector<std::vector<NodeId>> witnesses;
  std::vector<SurroundedDecomposition> per_round;
};

SecrecyVerdict PerfectSecrecy(const TopologySchedule& schedule,
                              std::size_t rounds, const AdversarySet& adv);
SecrecyVerdict PerfectSecrecy(std::span<const RoundTopology> rounds,
                              const AdversarySet& adv);

enum class FunctionalKind { kComponentSum, kIndividual };

struct LeakedFunctional {
  FunctionalKind kind = FunctionalKind::kComponentSum;
  std::vector<NodeId> members;
  std::optional<uint64_t> value;  // residue mod p
  std::optional<bool> matches_ground_truth;
};

struct InferenceOptions {
  // Coordinates to analyze; empty means every coordinate.
  std::vector<std::size_t> coordinates{0};
  // Rounds whose unknown count exceeds this are reported as skipped.
  std::size_t max_unknowns = 6000;
};

struct RoundInference {
  std::size_t round = 0;
  std::size_t coordinate = 0;
  bool skipped = false;
  SurroundedDecomposition decomposition;
  // Row-reduced basis of the inferable functionals over benign secrets
  // (columns follow AdversarySet::benign()), with their values.
  std::vector<std::vector<uint64_t>> basis;
  std::vector<uint64_t> basis_values;
  std::vector<bool> component_sum_inferable;  // per decomposition set
  std::vector<std::optional<uint64_t>> component_values;
  std::vector<bool> individual_inferable;  // per benign learner
  std::vector<LeakedFunctional> leaked;
  bool ground_truth_consistent = true;
  uint64_t prime = 0;

  // Whether the functional (over benign secrets) lies in the inferable span.
  bool InSpan(std::span<const uint64_t> functional) const;
  // Its value when it does.
  std::optional<uint64_t> Evaluate(std::span<const uint64_t> functional) const;
  // True iff the span is exactly span{1_B}.
  bool SpanIsBenignSumOnly() const;
};

struct InferenceReport {
  std::vector<RoundInference> rounds;
  SecrecyVerdict verdict;
  int sigma = 0;  // renders values as signed decimals

  nlohmann::json ToJson() const;
};

// Builds and row-reduces the coalition's GF(p) observation system per round
// and coordinate. Unknowns are the benign secrets and the benign polynomial
// coefficients; equations are the shares adversaries receive, every benign
// masked initial state s_i(0) (worst-case credit) and the public output.
// Throws kTranscriptIncomplete when shares, initial states or outputs are
// missing.
InferenceReport AdversaryInfer(const Transcript& transcript,
                               const AdversarySet& adv,
                               const InferenceOptions& options = {});

// Literal enumeration agrees with SurroundedComponents and the verdict
// agrees with connectivity of the benign-induced subgraph.
bool SecrecyCrossCheck(const RoundTopology& g, const AdversarySet& adv);

}  // namespace ppdfl

#endif  // PPDFL_PRIVACY_H_
