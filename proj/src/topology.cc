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

#include "ppdfl/topology.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

#include "ppdfl/error.h"
#include "ppdfl/rng.h"

namespace ppdfl {

RoundTopology::RoundTopology(std::size_t n_nodes, std::vector<Edge> edges,
                             std::size_t round_index)
    : round_index_(round_index), adjacency_(n_nodes) {
  for (auto& [a, b] : edges) {
    if (a == b) {
      throw Error(ErrorCode::kBadParameters,
                  "self-loop on node " + std::to_string(a));
    }
    if (a == 0 || b == 0 || a > n_nodes || b > n_nodes) {
      std::ostringstream msg;
      msg << "edge (" << a << ", " << b << ") outside nodes 1.." << n_nodes;
      throw Error(ErrorCode::kBadParameters, msg.str());
    }
    if (a > b) std::swap(a, b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [a, b] : edges_) {
    adjacency_[a - 1].push_back(b);
    adjacency_[b - 1].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

bool RoundTopology::HasEdge(NodeId i, NodeId j) const {
  if (i == 0 || i > n_nodes()) return false;
  const auto& nbrs = adjacency_[i - 1];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

std::vector<std::vector<NodeId>> InducedComponents(
    const RoundTopology& g, std::span<const NodeId> nodes) {
  std::vector<char> member(g.n_nodes() + 1, 0);
  for (NodeId v : nodes) member[v] = 1;
  std::vector<char> seen(g.n_nodes() + 1, 0);
  std::vector<NodeId> order(nodes.begin(), nodes.end());
  std::sort(order.begin(), order.end());
  std::vector<std::vector<NodeId>> components;
  for (NodeId start : order) {
    if (seen[start]) continue;
    std::vector<NodeId> comp;
    std::vector<NodeId> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      comp.push_back(v);
      for (NodeId u : g.Neighbors(v)) {
        if (member[u] && !seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

bool IsInducedConnected(const RoundTopology& g,
                        std::span<const NodeId> nodes) {
  return InducedComponents(g, nodes).size() <= 1;
}

bool IsConnected(const RoundTopology& g) {
  std::vector<NodeId> all(g.n_nodes());
  std::iota(all.begin(), all.end(), NodeId{1});
  return IsInducedConnected(g, all);
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries)
    : dense_(std::move(entries)) {
  if (dense_.rows() != dense_.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "weight matrix is not square");
  }
  off_diagonal_.resize(size());
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (i != j && dense_(i, j) != 0.0) {
        off_diagonal_[i].push_back({j, dense_(i, j)});
      }
    }
  }
}

bool WeightMatrix::IsSymmetric(double tol) const {
  return (dense_ - dense_.transpose()).cwiseAbs().maxCoeff() <= tol;
}

WeightMatrix MetropolisHastingsWeights(const RoundTopology& g) {
  if (!IsConnected(g)) {
    throw Error(ErrorCode::kDisconnectedGraph,
                "round " + std::to_string(g.round_index()) +
                    " topology is not connected");
  }
  const std::size_t n = g.n_nodes();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (NodeId i = 1; i <= n; ++i) {
    double off = 0;
    for (NodeId j : g.Neighbors(i)) {
      const double w =
          1.0 / static_cast<double>(std::max(g.Degree(i), g.Degree(j)) + 1);
      a(i - 1, j - 1) = w;
      off += w;
    }
    a(i - 1, i - 1) = 1.0 - off;
  }
  return WeightMatrix(std::move(a));
}

namespace {

Eigen::MatrixXd Centered(const WeightMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  return a.dense() -
         Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
}

// Spectral radius of a symmetric matrix via power iteration on ||M x||.
double PowerIterationRadius(const Eigen::MatrixXd& m,
                            const SpectralOptions& options) {
  DeterministicRng rng(DeriveSeed(0, {static_cast<uint64_t>(StreamTag::kSpectral)}));
  Eigen::VectorXd x(m.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.UniformReal(-1, 1);
  x.normalize();
  double estimate = 0;
  for (int it = 0; it < options.power_max_iterations; ++it) {
    Eigen::VectorXd y = m * x;
    const double norm = y.norm();
    if (norm == 0) return 0;
    const double rel = std::fabs(norm - estimate) / norm;
    estimate = norm;
    x = y / norm;
    if (rel < options.power_tolerance) break;
  }
  return estimate;
}

}  // namespace

double ContractionRadius(const WeightMatrix& a,
                         const SpectralOptions& options) {
  const Eigen::MatrixXd m = Centered(a);
  if (a.IsSymmetric()) {
    if (a.size() > options.dense_limit) {
      return PowerIterationRadius(m, options);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

ConsensusConditionReport VerifyConsensusConditions(
    const WeightMatrix& a, const SpectralOptions& options) {
  ConsensusConditionReport report;
  report.row_sum_error =
      (a.dense().rowwise().sum().array() - 1.0).abs().maxCoeff();
  report.col_sum_error =
      (a.dense().colwise().sum().array() - 1.0).abs().maxCoeff();
  report.contraction_radius = ContractionRadius(a, options);
  report.passes = report.row_sum_error < 1e-9 && report.col_sum_error < 1e-9 &&
                  report.contraction_radius < 1.0 - 1e-12;
  return report;
}

double SecondLargestEigenvalue(const WeightMatrix& a,
                               const SpectralOptions& options) {
  if (!a.IsSymmetric()) {
    throw Error(ErrorCode::kNotSymmetric,
                "second largest eigenvalue needs a symmetric matrix");
  }
  if (a.size() < 2) return 0;
  if (a.size() > options.dense_limit) {
    return PowerIterationRadius(Centered(a), options);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.dense(),
                                                        Eigen::EigenvaluesOnly);
  std::vector<double> mags(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + a.size());
  for (double& m : mags) m = std::fabs(m);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return mags[1];
}

TopologySpec TopologySpec::Parse(const std::string& text) {
  TopologySpec spec;
  if (text == "complete") {
    spec.kind = TopologyKind::kComplete;
  } else if (text == "star") {
    spec.kind = TopologyKind::kStar;
  } else if (text == "line") {
    spec.kind = TopologyKind::kLine;
  } else if (text == "ring") {
    spec.kind = TopologyKind::kRing;
  } else if (text.rfind("random:", 0) == 0) {
    spec.kind = TopologyKind::kRandomConnected;
    const std::string arg = text.substr(7);
    std::size_t used = 0;
    try {
      spec.avg_degree = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != arg.size()) {
      throw Error(ErrorCode::kBadParameters,
                  "bad average degree in topology '" + text + "'");
    }
  } else {
    throw Error(ErrorCode::kBadParameters, "unknown topology '" + text + "'");
  }
  return spec;
}

std::string TopologySpec::ToString() const {
  switch (kind) {
    case TopologyKind::kComplete: return "complete";
    case TopologyKind::kStar: return "star";
    case TopologyKind::kLine: return "line";
    case TopologyKind::kRing: return "ring";
    case TopologyKind::kRandomConnected: {
      std::ostringstream os;
      os << "random:" << avg_degree;
      return os.str();
    }
  }
  return "unknown";
}

namespace {

std::vector<Edge> PrueferTree(std::size_t n, DeterministicRng& rng) {
  if (n == 2) return {{1, 2}};
  std::vector<NodeId> code(n - 2);
  for (auto& c : code) c = static_cast<NodeId>(rng.UniformInRange(1, n));
  std::vector<std::size_t> remaining(n + 1, 1);
  for (NodeId c : code) ++remaining[c];
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> leaves;
  for (NodeId v = 1; v <= n; ++v) {
    if (remaining[v] == 1) leaves.push(v);
  }
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (NodeId c : code) {
    const NodeId leaf = leaves.top();
    leaves.pop();
    edges.emplace_back(leaf, c);
    if (--remaining[c] == 1) leaves.push(c);
  }
  const NodeId u = leaves.top();
  leaves.pop();
  edges.emplace_back(u, leaves.top());
  return edges;
}

}  // namespace

RoundTopology GenerateTopology(const TopologySpec& spec, std::size_t n,
                               uint64_t seed, std::size_t round_index) {
  if (n < 2) {
    throw Error(ErrorCode::kBadParameters, "topologies need at least 2 nodes");
  }
  std::vector<Edge> edges;
  const auto nn = static_cast<NodeId>(n);
  switch (spec.kind) {
    case TopologyKind::kComplete:
      for (NodeId i = 1; i <= nn; ++i) {
        for (NodeId j = i + 1; j <= nn; ++j) edges.emplace_back(i, j);
      }
      break;
    case TopologyKind::kStar:
      for (NodeId j = 2; j <= nn; ++j) edges.emplace_back(1, j);
      break;
    case TopologyKind::kLine:
      for (NodeId i = 1; i < nn; ++i) edges.emplace_back(i, i + 1);
      break;
    case TopologyKind::kRing:
      if (n < 3) throw Error(ErrorCode::kBadParameters, "ring needs 3 nodes");
      for (NodeId i = 1; i < nn; ++i) edges.emplace_back(i, i + 1);
      edges.emplace_back(1, nn);
      break;
    case TopologyKind::kRandomConnected: {
      if (!(spec.avg_degree >= 2.0 &&
            spec.avg_degree <= static_cast<double>(n - 1))) {
        std::ostringstream msg;
        msg << "average degree " << spec.avg_degree << " outside [2, "
            << n - 1 << "]";
        throw Error(ErrorCode::kBadParameters, msg.str());
      }
      DeterministicRng rng = DeterministicRng::ForStream(
          seed, StreamTag::kTopology, {round_index, n});
      edges = PrueferTree(n, rng);
      const std::size_t max_edges = n * (n - 1) / 2;
      const auto target = std::min<std::size_t>(
          max_edges, static_cast<std::size_t>(
                         std::llround(spec.avg_degree * static_cast<double>(n) / 2.0)));
      RoundTopology tree(n, edges);
      std::vector<Edge> absent;
      for (NodeId i = 1; i <= nn; ++i) {
        for (NodeId j = i + 1; j <= nn; ++j) {
          if (!tree.HasEdge(i, j)) absent.emplace_back(i, j);
        }
      }
      const std::size_t extra =
          target > edges.size() ? target - edges.size() : 0;
      for (std::size_t k = 0; k < extra; ++k) {
        const std::size_t pick = k + rng.UniformBelow(absent.size() - k);
        std::swap(absent[k], absent[pick]);
        edges.push_back(absent[k]);
      }
      break;
    }
  }
  return RoundTopology(n, std::move(edges), round_index);
}

TopologySchedule TopologySchedule::Explicit(std::vector<RoundTopology> rounds) {
  TopologySchedule s;
  if (!rounds.empty()) s.n_nodes_ = rounds.front().n_nodes();
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    if (rounds[t].n_nodes() != s.n_nodes_) {
      throw Error(ErrorCode::kBadParameters,
                  "schedule rounds disagree on the learner count");
    }
    rounds[t].set_round_index(t + 1);
  }
  s.rounds_ = std::move(rounds);
  return s;
}

TopologySchedule TopologySchedule::Generated(TopologySpec spec, std::size_t n,
                                             uint64_t seed) {
  TopologySchedule s;
  s.n_nodes_ = n;
  s.generator_ = spec;
  s.seed_ = seed;
  return s;
}

RoundTopology TopologySchedule::ForRound(std::size_t t) const {
  if (generator_) return GenerateTopology(*generator_, n_nodes_, seed_, t);
  if (t == 0 || t > rounds_.size()) {
    throw Error(ErrorCode::kBadParameters,
                "schedule has no round " + std::to_string(t));
  }
  return rounds_[t - 1];
}

void TopologySchedule::Validate(std::size_t rounds) const {
  if (!generator_ && rounds_.size() < rounds) {
    std::ostringstream msg;
    msg << "schedule lists " << rounds_.size() << " rounds, " << rounds
        << " required";
    throw Error(ErrorCode::kBadParameters, msg.str());
  }
  for (std::size_t t = 1; t <= rounds; ++t) {
    if (!IsConnected(ForRound(t))) {
      throw Error(ErrorCode::kDisconnectedGraph,
                  "round " + std::to_string(t) + " topology is not connected");
    }
  }
}

}  // namespace ppdfl
