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

// Timing sweeps over share count and consensus iterations with a linear fit.

#ifndef PPDFL_BENCH_H_
#define PPDFL_BENCH_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ppdfl/topology.h"

namespace ppdfl {

struct BenchPoint {
  double x = 0;
  double seconds = 0;
};

// Ordinary least squares. Fewer than two distinct x values leave every
// field empty.
struct LinearFit {
  std::size_t points = 0;
  std::optional<double> slope;
  std::optional<double> intercept;
  std::optional<double> r_squared;
};

LinearFit FitLine(std::span<const BenchPoint> points);

struct BenchOptions {
  std::size_t n_learners = 20;
  TopologySpec topology{TopologyKind::kRandomConnected, 6};
  uint64_t seed = 1;
  // Model dimensions for the share sweep (K fixed at fixed_k).
  std::vector<std::size_t> dims{250, 500, 750, 1000, 1250, 1500};
  // Iteration counts for the consensus sweep (dimension fixed_dim).
  std::vector<std::size_t> ks{200, 400, 600, 800, 1000, 1200};
  std::size_t fixed_k = 10;
  std::size_t fixed_dim = 64;
  int repeats = 3;
};

struct BenchResult {
  double shares_per_dim = 0;  // average |closed neighborhood|
  // x: shares per learner per round; seconds: aggregation time per learner.
  std::vector<BenchPoint> share_sweep;
  LinearFit share_fit;
  // x: K; seconds: consensus time per learner.
  std::vector<BenchPoint> k_sweep;
  LinearFit k_fit;
};

// Repeats are interleaved across points. Each point is the mean of its
// samples with the slowest one dropped.
BenchResult RunBench(const BenchOptions& options);

// Rows "sweep,x,seconds" followed by "fit,<sweep>,slope,intercept,r2" rows
// where undefined values print as "undefined".
void WriteBenchCsv(std::ostream& out, const BenchResult& result);

}  // namespace ppdfl

#endif  // PPDFL_BENCH_H_
