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

#include "ppdfl/bench.h"

#include <algorithm>
#include <limits>
#include <ostream>

#include "ppdfl/error.h"
#include "ppdfl/fixed_point.h"
#include "ppdfl/prime_field.h"
#include "ppdfl/protocol.h"
#include "ppdfl/rng.h"

namespace ppdfl {
namespace {

std::vector<std::vector<double>> BenchModels(std::size_t n, std::size_t dim,
                                             uint64_t seed) {
  DeterministicRng rng = DeterministicRng::ForStream(seed, StreamTag::kTest);
  std::vector<std::vector<double>> models(n, std::vector<double>(dim));
  for (auto& m : models) {
    for (double& x : m) x = rng.UniformReal(-1, 1);
  }
  return models;
}

// Mean after dropping the slowest sample (when there are at least three).
double TrimmedMean(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  if (samples.size() >= 3) samples.pop_back();
  double total = 0;
  for (double x : samples) total += x;
  return total / static_cast<double>(samples.size());
}

void PrintOptional(std::ostream& out, const std::optional<double>& v) {
  if (v) {
    out << *v;
  } else {
    out << "undefined";
  }
}

}  // namespace

LinearFit FitLine(std::span<const BenchPoint> points) {
  LinearFit fit;
  fit.points = points.size();
  if (points.size() < 2) return fit;
  double mx = 0, my = 0;
  for (const auto& pt : points) {
    mx += pt.x;
    my += pt.seconds;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& pt : points) {
    sxx += (pt.x - mx) * (pt.x - mx);
    sxy += (pt.x - mx) * (pt.seconds - my);
    syy += (pt.seconds - my) * (pt.seconds - my);
  }
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - *fit.slope * mx;
  if (syy > 0) fit.r_squared = sxy * sxy / (sxx * syy);
  return fit;
}

BenchResult RunBench(const BenchOptions& options) {
  const std::size_t n = options.n_learners;
  if (n < 2 || options.repeats < 1) {
    throw Error(ErrorCode::kBadParameters, "bench needs N >= 2, repeats >= 1");
  }
  const RoundTopology g = GenerateTopology(options.topology, n, options.seed);
  const Precision prec(2);
  const PrimeModulus prime(NextPrime(2 * 100 * n + 1));
  RoundParams params;
  params.prime = prime;
  params.precision = prec;
  params.weights.assign(n, 1.0 / static_cast<double>(n));
  params.theta_max = 1;
  params.seed = options.seed;
  params.transcript = TranscriptLevel::kNone;
  params.trajectory_coordinates.clear();

  BenchResult result;
  double closed = 0;
  for (NodeId i = 1; i <= n; ++i) closed += static_cast<double>(g.Degree(i) + 1);
  result.shares_per_dim = closed / static_cast<double>(n);
  const double per_learner = 1.0 / static_cast<double>(n);

  // Repeats are interleaved across points so a burst of background load
  // does not hit every sample of one point.
  std::vector<std::vector<std::vector<double>>> share_models;
  for (std::size_t dim : options.dims) {
    share_models.push_back(BenchModels(n, dim, options.seed));
  }
  const auto k_models = BenchModels(n, options.fixed_dim, options.seed);
  std::vector<std::vector<double>> share_samples(options.dims.size());
  std::vector<std::vector<double>> k_samples(options.ks.size());
  for (int r = 0; r < options.repeats; ++r) {
    params.k = options.fixed_k;
    for (std::size_t d = 0; d < options.dims.size(); ++d) {
      share_samples[d].push_back(
          ExecuteRound(share_models[d], g, params).timings.total());
    }
    for (std::size_t j = 0; j < options.ks.size(); ++j) {
      params.k = options.ks[j];
      k_samples[j].push_back(
          ExecuteRound(k_models, g, params).timings.consensus);
    }
  }
  std::vector<double> share_best, k_best;
  for (const auto& s : share_samples) share_best.push_back(TrimmedMean(s));
  for (const auto& s : k_samples) k_best.push_back(TrimmedMean(s));
  for (std::size_t d = 0; d < options.dims.size(); ++d) {
    result.share_sweep.push_back(
        {result.shares_per_dim * static_cast<double>(options.dims[d]),
         share_best[d] * per_learner});
  }
  result.share_fit = FitLine(result.share_sweep);
  for (std::size_t j = 0; j < options.ks.size(); ++j) {
    result.k_sweep.push_back(
        {static_cast<double>(options.ks[j]), k_best[j] * per_learner});
  }
  result.k_fit = FitLine(result.k_sweep);
  return result;
}

void WriteBenchCsv(std::ostream& out, const BenchResult& result) {
  const auto old_precision = out.precision(10);
  out << "sweep,x,seconds\n";
  for (const auto& pt : result.share_sweep) {
    out << "shares," << pt.x << ',' << pt.seconds << '\n';
  }
  for (const auto& pt : result.k_sweep) {
    out << "k," << pt.x << ',' << pt.seconds << '\n';
  }
  auto fit_row = [&](const char* name, const LinearFit& f) {
    out << "fit," << name << ',';
    PrintOptional(out, f.slope);
    out << ',';
    PrintOptional(out, f.intercept);
    out << ',';
    PrintOptional(out, f.r_squared);
    out << '\n';
  };
  fit_row("shares", result.share_fit);
  fit_row("k", result.k_fit);
  out.precision(old_precision);
}

}  // namespace ppdfl
