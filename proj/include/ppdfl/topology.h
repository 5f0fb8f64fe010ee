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

#ifndef PPDFL_TOPOLOGY_H_
#define PPDFL_TOPOLOGY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ppdfl {

// Learner ids are 1-based throughout the public API.
using NodeId = uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Undirected simple graph on nodes 1..n for one aggregation round.
// Connectivity is not enforced here; see IsConnected and the consumers that
// require it.
class RoundTopology {
 public:
  // Edges are normalized to (min, max) and deduplicated. Throws
  // kBadParameters on self-loops or ids outside [1, n].
  RoundTopology(std::size_t n_nodes, std::vector<Edge> edges,
                std::size_t round_index = 0);

  std::size_t n_nodes() const { return adjacency_.size(); }
  std::size_t round_index() const { return round_index_; }
  void set_round_index(std::size_t t) { round_index_ = t; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Ascending neighbor ids of learner i.
  const std::vector<NodeId>& Neighbors(NodeId i) const {
    return adjacency_[i - 1];
  }
  std::size_t Degree(NodeId i) const { return adjacency_[i - 1].size(); }
  bool HasEdge(NodeId i, NodeId j) const;

 private:
  std::size_t round_index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
};

bool IsConnected(const RoundTopology& g);

// Whether the subgraph induced by `nodes` is connected (vacuously true for
// an empty or singleton set).
bool IsInducedConnected(const RoundTopology& g, std::span<const NodeId> nodes);

// Connected components of the subgraph induced by `nodes`, each sorted, in
// order of their smallest member.
std::vector<std::vector<NodeId>> InducedComponents(
    const RoundTopology& g, std::span<const NodeId> nodes);

// An N x N real matrix with a cached sparse row view. Row/column indices
// are 0-based (learner id - 1).
class WeightMatrix {
 public:
  struct Entry {
    std::size_t col;
    double weight;
  };

  explicit WeightMatrix(Eigen::MatrixXd entries);

  std::size_t size() const { return static_cast<std::size_t>(dense_.rows()); }
  const Eigen::MatrixXd& dense() const { return dense_; }
  double operator()(std::size_t i, std::size_t j) const { return dense_(i, j); }
  double diagonal(std::size_t i) const { return dense_(i, i); }

  // Nonzero off-diagonal entries of row i in ascending column order.
  const std::vector<Entry>& OffDiagonal(std::size_t i) const {
    return off_diagonal_[i];
  }

  bool IsSymmetric(double tol = 1e-12) const;

 private:
  Eigen::MatrixXd dense_;
  std::vector<std::vector<Entry>> off_diagonal_;
};

// Metropolis-Hastings weights: 1 / (max(deg i, deg j) + 1) on edges, the
// residual 1 - sum(row) on the diagonal. Throws kDisconnectedGraph.
WeightMatrix MetropolisHastingsWeights(const RoundTopology& g);

struct SpectralOptions {
  // Matrices larger than this use power iteration instead of a dense
  // symmetric eigensolve.
  std::size_t dense_limit = 2000;
  double power_tolerance = 1e-12;
  int power_max_iterations = 100000;
};

struct ConsensusConditionReport {
  double row_sum_error = 0;  // max_i |sum_j a_ij - 1|
  double col_sum_error = 0;  // max_j |sum_i a_ij - 1|
  double contraction_radius = 0;  // rho(A - (1/N) 1 1^T)
  bool passes = false;
};

ConsensusConditionReport VerifyConsensusConditions(
    const WeightMatrix& a, const SpectralOptions& options = {});

// Spectral radius of A - (1/N) 1 1^T.
double ContractionRadius(const WeightMatrix& a,
                         const SpectralOptions& options = {});

// Modulus of the eigenvalue with the second largest modulus. Requires a
// symmetric matrix (kNotSymmetric otherwise). Above the dense limit the
// matrix is assumed doubly stochastic and the contraction radius is
// returned, which coincides with it in that case.
double SecondLargestEigenvalue(const WeightMatrix& a,
                               const SpectralOptions& options = {});

enum class TopologyKind { kComplete, kStar, kLine, kRing, kRandomConnected };

struct TopologySpec {
  TopologyKind kind = TopologyKind::kComplete;
  double avg_degree = 0;  // random_connected only

  // "complete", "star", "line", "ring" or "random:<avg_degree>". Throws
  // kBadParameters on anything else.
  static TopologySpec Parse(const std::string& text);
  std::string ToString() const;
};

// Named deterministic graphs (star hub = learner 1, line 1-2-...-N), or a
// seeded random connected graph: a uniform random spanning tree decoded from
// a random Pruefer sequence, plus uniformly chosen extra edges until the
// average degree reaches the target. Throws kBadParameters.
RoundTopology GenerateTopology(const TopologySpec& spec, std::size_t n,
                               uint64_t seed, std::size_t round_index = 0);

// Per-round topologies, either listed explicitly or generated from a spec
// with a per-round substream of the seed.
class TopologySchedule {
 public:
  // An empty explicit schedule.
  TopologySchedule() = default;

  static TopologySchedule Explicit(std::vector<RoundTopology> rounds);
  static TopologySchedule Generated(TopologySpec spec, std::size_t n,
                                    uint64_t seed);

  // Round t is 1-based.
  RoundTopology ForRound(std::size_t t) const;

  bool is_explicit() const { return !generator_.has_value(); }
  std::size_t explicit_length() const { return rounds_.size(); }
  std::size_t n_nodes() const { return n_nodes_; }
  const std::optional<TopologySpec>& generator() const { return generator_; }
  uint64_t seed() const { return seed_; }

  // Throws kBadParameters if fewer than `rounds` rounds are available and
  // kDisconnectedGraph if any of the first `rounds` graphs is disconnected.
  void Validate(std::size_t rounds) const;

 private:
  std::size_t n_nodes_ = 0;
  std::vector<RoundTopology> rounds_;
  std::optional<TopologySpec> generator_;
  uint64_t seed_ = 0;
};

}  // namespace ppdfl

#endif  // PPDFL_TOPOLOGY_H_
