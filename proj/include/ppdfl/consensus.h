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

#ifndef PPDFL_CONSENSUS_H_
#define PPDFL_CONSENSUS_H_

// Finite-iteration average consensus.
//
// States are doubles even when they start as field residues. The protocol
// needs |N * s_i(K) - sum_j s_j(0)| < 0.5 before rounding; initial residues
// are below p < 2^31, so N * s stays under 2^38 for N <= 128 and a double
// keeps roughly 15 bits of fraction there. Per-step rounding error is about
// 2^-53 of the magnitude and is itself contracted by A, so even K ~ 10^5
// iterations leave the accumulated error orders of magnitude below the
// rounding margin.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ppdfl/prime_field.h"
#include "ppdfl/topology.h"

namespace ppdfl {

// Row i holds learner (i + 1)'s n-dimensional state.
using StateMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct StateVector {
  std::size_t iteration = 0;
  StateMatrix values;
};

// Snapshots for k = 0..K.
using Trajectory = std::vector<StateVector>;

// out_i = a_ii * in_i + sum_{j in N_i, ascending} a_ij * in_j. The fixed
// accumulation order makes results independent of thread count.
void ConsensusStepInto(const StateMatrix& in, const WeightMatrix& a,
                       StateMatrix& out);

// Throws kDimensionMismatch unless states has a.size() rows.
StateVector ConsensusStep(const StateVector& states, const WeightMatrix& a);

Trajectory RunConsensus(const StateVector& initial, const WeightMatrix& a,
                        std::size_t k);

// ||N A^k - 1 1^T||_2, from an explicit matrix power (repeated squaring).
double DecayNorm(const WeightMatrix& a, std::size_t k);

// DecayNorm for k = 0..k_max by successive multiplication.
std::vector<double> DecayTable(const WeightMatrix& a, std::size_t k_max);

// 2 p sqrt(N) ||N A^k - 1 1^T|| < 1, evaluated directly.
bool SatisfiesIterationBound(const WeightMatrix& a, uint64_t p, std::size_t k);

// Smallest K >= 1 with 2 p sqrt(N) ||N A^K - 1 1^T|| < 1. For symmetric
// doubly stochastic A the norm equals N * lambda^K with lambda the second
// largest eigenvalue modulus, which gives K in closed form; the result is
// then confirmed (and nudged if needed) by direct evaluation at K and K-1.
// Throws kNoFiniteK when A does not contract, kDimensionMismatch when
// n_learners differs from A's size.
std::size_t MinIterations(const WeightMatrix& a, PrimeModulus p,
                          std::size_t n_learners);

// Conservative global K: the maximum of MinIterations over a family.
std::size_t ConservativeIterations(std::span<const WeightMatrix> family,
                                   PrimeModulus p);

// sum_i w_i theta_i. Throws kBadWeights unless all w_i > 0 and
// |sum w_i - 1| <= 1e-12; kDimensionMismatch on ragged input.
std::vector<double> PlainWeightedAggregate(
    const std::vector<std::vector<double>>& models,
    std::span<const double> weights);

// CSV rows "round,iteration,learner_id,coordinate,value" for the selected
// coordinates (no header).
void WriteTrajectoryCsv(std::ostream& out, std::size_t round,
                        const Trajectory& trajectory,
                        std::span<const std::size_t> coordinates);

}  // namespace ppdfl

#endif  // PPDFL_CONSENSUS_H_
