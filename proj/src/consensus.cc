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

#include "ppdfl/consensus.h"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "ppdfl/error.h"
#include "ppdfl/parallel.h"

namespace ppdfl {

void ConsensusStepInto(const StateMatrix& in, const WeightMatrix& a,
                       StateMatrix& out) {
  const auto n = static_cast<std::size_t>(in.rows());
  if (n != a.size()) {
    std::ostringstream msg;
    msg << "state has " << n << " learners, weight matrix " << a.size();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  out.resize(in.rows(), in.cols());
  const std::size_t work = n * static_cast<std::size_t>(in.cols());
  ParallelFor(
      n,
      [&](std::size_t i) {
        const auto row = static_cast<Eigen::Index>(i);
        out.row(row) = a.diagonal(i) * in.row(row);
        for (const auto& e : a.OffDiagonal(i)) {
          out.row(row) += e.weight * in.row(static_cast<Eigen::Index>(e.col));
        }
      },
      work < (std::size_t{1} << 16) ? n : 1);
}

StateVector ConsensusStep(const StateVector& states, const WeightMatrix& a) {
  StateVector next;
  next.iteration = states.iteration + 1;
  ConsensusStepInto(states.values, a, next.values);
  return next;
}

Trajectory RunConsensus(const StateVector& initial, const WeightMatrix& a,
                        std::size_t k) {
  if (static_cast<std::size_t>(initial.values.rows()) != a.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "initial state rows differ from the weight matrix size");
  }
  Trajectory out;
  out.reserve(k + 1);
  out.push_back(initial);
  for (std::size_t step = 0; step < k; ++step) {
    out.push_back(ConsensusStep(out.back(), a));
  }
  return out;
}

namespace {

double SpectralNorm(const Eigen::MatrixXd& m) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::MatrixXd MatrixPower(const Eigen::MatrixXd& a, std::size_t k) {
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

double DecayFromPower(const Eigen::MatrixXd& power) {
  const auto n = power.rows();
  return SpectralNorm(static_cast<double>(n) * power -
                      Eigen::MatrixXd::Ones(n, n));
}

}  // namespace

double DecayNorm(const WeightMatrix& a, std::size_t k) {
  return DecayFromPower(MatrixPower(a.dense(), k));
}

std::vector<double> DecayTable(const WeightMatrix& a, std::size_t k_max) {
  std::vector<double> out;
  out.reserve(k_max + 1);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(a.size(), a.size());
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k > 0) power = power * a.dense();
    out.push_back(DecayFromPower(power));
  }
  return out;
}

bool SatisfiesIterationBound(const WeightMatrix& a, uint64_t p,
                             std::size_t k) {
  const double n = static_cast<double>(a.size());
  return 2.0 * static_cast<double>(p) * std::sqrt(n) * DecayNorm(a, k) < 1.0;
}

std::size_t MinIterations(const WeightMatrix& a, PrimeModulus p,
                          std::size_t n_learners) {
  if (n_learners != a.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "learner count differs from the weight matrix size");
  }
  const uint64_t prime = p.value();
  const double lambda = ContractionRadius(a);
  if (!(lambda < 1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "contraction radius " << lambda << " admits no finite K";
    throw Error(ErrorCode::kNoFiniteK, msg.str());
  }
  constexpr std::size_t kSearchCap = 100000000;
  std::size_t k = 1;
  if (a.IsSymmetric() && lambda > 0) {
    const double n = static_cast<double>(a.size());
    const double target = std::log(2.0 * static_cast<double>(prime) * n *
                                   std::sqrt(n));
    const double estimate = std::floor(target / -std::log(lambda)) + 1.0;
    k = static_cast<std::size_t>(std::max(1.0, std::min(estimate, 1e8)));
  }
  while (!SatisfiesIterationBound(a, prime, k)) {
    // Non-symmetric matrices fall back to doubling then bisection.
    std::size_t next = a.IsSymmetric() ? k + 1 : k * 2;
    if (next > kSearchCap) {
      throw Error(ErrorCode::kNoFiniteK, "iteration search exceeded cap");
    }
    k = next;
  }
  if (!a.IsSymmetric()) {
    std::size_t lo = k / 2;  // fails (or zero)
    while (lo + 1 < k) {
      const std::size_t mid = lo + (k - lo) / 2;
      if (SatisfiesIterationBound(a, prime, mid)) {
        k = mid;
      } else {
        lo = mid;
      }
    }
  }
  while (k > 1 && SatisfiesIterationBound(a, prime, k - 1)) --k;
  return k;
}

std::size_t ConservativeIterations(std::span<const WeightMatrix> family,
                                   PrimeModulus p) {
  std::size_t k = 0;
  for (const auto& a : family) k = std::max(k, MinIterations(a, p, a.size()));
  return k;
}

std::vector<double> PlainWeightedAggregate(
    const std::vector<std::vector<double>>& models,
    std::span<const double> weights) {
  if (models.size() != weights.size() || models.empty()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "one weight per model is required");
  }
  double total = 0;
  for (double w : weights) {
    if (!(w > 0)) throw Error(ErrorCode::kBadWeights, "weights must be > 0");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "weights sum to " << total;
    throw Error(ErrorCode::kBadWeights, msg.str());
  }
  const std::size_t dim = models.front().size();
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged model list");
    }
    for (std::size_t l = 0; l < dim; ++l) out[l] += weights[i] * models[i][l];
  }
  return out;
}

void WriteTrajectoryCsv(std::ostream& out, std::size_t round,
                        const Trajectory& trajectory,
                        std::span<const std::size_t> coordinates) {
  const auto old_precision = out.precision(17);
  for (const auto& snapshot : trajectory) {
    for (Eigen::Index i = 0; i < snapshot.values.rows(); ++i) {
      for (std::size_t l : coordinates) {
        if (l >= static_cast<std::size_t>(snapshot.values.cols())) continue;
        out << round << ',' << snapshot.iteration << ',' << i + 1 << ',' << l
            << ',' << snapshot.values(i, static_cast<Eigen::Index>(l)) << '\n';
      }
    }
  }
  out.precision(old_precision);
}

}  // namespace ppdfl
