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

#include "ppdfl/protocol.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "ppdfl/error.h"
#include "ppdfl/parallel.h"
#include "ppdfl/secret_sharing.h"

namespace ppdfl {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

uint64_t MulMod(uint64_t a, uint64_t b, uint64_t p) { return a * b % p; }

std::vector<NodeId> ClosedNeighborhood(const RoundTopology& g, NodeId i) {
  std::vector<NodeId> c = g.Neighbors(i);
  c.insert(std::lower_bound(c.begin(), c.end(), i), i);
  return c;
}

void CheckModels(const std::vector<std::vector<double>>& models,
                 std::size_t n_learners, std::size_t n_weights) {
  if (models.size() != n_learners || n_weights != n_learners) {
    throw Error(ErrorCode::kDimensionMismatch,
                "need one model and one weight per learner");
  }
  if (models.front().empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "models must be nonempty");
  }
  for (const auto& m : models) {
    if (m.size() != models.front().size()) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged model vectors");
    }
  }
}

// floor(x + 0.5) reduced into [0, p).
uint64_t RoundToResidue(double x, uint64_t p) {
  const auto z = static_cast<int64_t>(std::floor(x + 0.5));
  const auto ip = static_cast<int64_t>(p);
  return static_cast<uint64_t>(((z % ip) + ip) % ip);
}

}  // namespace

PhaseTimings& PhaseTimings::operator+=(const PhaseTimings& o) {
  weights += o.weights;
  shares += o.shares;
  initial_state += o.initial_state;
  consensus += o.consensus;
  reconstruct += o.reconstruct;
  return *this;
}

TrainerHook SyntheticTrainer(double theta_max, double noise) {
  return [theta_max, noise](NodeId, std::size_t, std::span<const double> init,
                            DeterministicRng& rng) {
    std::vector<double> out(init.begin(), init.end());
    for (double& x : out) {
      x = std::clamp(x + rng.UniformReal(-noise, noise), -theta_max,
                     theta_max);
    }
    return out;
  };
}

TrainerHook ConstantTrainer() {
  return [](NodeId, std::size_t, std::span<const double> init,
            DeterministicRng&) {
    return std::vector<double>(init.begin(), init.end());
  };
}

TrainerHook MakeTrainer(const ProtocolConfig& cfg) {
  if (cfg.trainer.kind == TrainerKind::kConstant) return ConstantTrainer();
  const double noise =
      cfg.trainer.noise < 0 ? 0.05 * cfg.theta_max : cfg.trainer.noise;
  return SyntheticTrainer(cfg.theta_max, noise);
}

std::vector<FieldElement> BuildInitialState(
    std::span<const ShareBundle* const> received, NodeId receiver,
    const RoundTopology& g, PrimeModulus p, std::size_t model_dim) {
  const std::vector<NodeId> expected = ClosedNeighborhood(g, receiver);
  std::vector<const ShareBundle*> by_sender(expected.size(), nullptr);
  for (const ShareBundle* b : received) {
    if (b->receiver != receiver) {
      throw Error(ErrorCode::kBadParameters,
                  "bundle addressed to learner " + std::to_string(b->receiver) +
                      " delivered to learner " + std::to_string(receiver));
    }
    auto it = std::lower_bound(expected.begin(), expected.end(), b->sender);
    if (it == expected.end() || *it != b->sender) {
      throw Error(ErrorCode::kBadParameters,
                  "learner " + std::to_string(b->sender) +
                      " is not a neighbor of learner " +
                      std::to_string(receiver));
    }
    auto& slot = by_sender[static_cast<std::size_t>(it - expected.begin())];
    if (slot != nullptr) {
      throw Error(ErrorCode::kBadParameters,
                  "duplicate bundle from learner " + std::to_string(b->sender));
    }
    if (b->values.size() != model_dim) {
      throw Error(ErrorCode::kDimensionMismatch, "bundle length mismatch");
    }
    slot = b;
  }
  std::vector<uint64_t> sum(model_dim, 0);
  for (std::size_t s = 0; s < expected.size(); ++s) {
    if (by_sender[s] == nullptr) {
      throw Error(ErrorCode::kMissingBundle,
                  "learner " + std::to_string(receiver) +
                      " has no bundle from learner " +
                      std::to_string(expected[s]));
    }
    for (std::size_t l = 0; l < model_dim; ++l) {
      sum[l] = (sum[l] + by_sender[s]->values[l] % p.value()) % p.value();
    }
  }
  std::vector<FieldElement> out;
  out.reserve(model_dim);
  for (uint64_t v : sum) out.emplace_back(v, p);
  return out;
}

std::vector<double> RoundResult::DecodedModel(NodeId i,
                                              const Precision& prec) const {
  std::vector<double> out;
  for (int64_t u : decoded_units.at(i - 1)) {
    out.push_back(static_cast<double>(u) / static_cast<double>(prec.scale()));
  }
  return out;
}

std::vector<int64_t> QuantizedOracle(
    const std::vector<std::vector<double>>& models,
    std::span<const double> weights, const Precision& prec) {
  CheckModels(models, models.size(), weights.size());
  std::vector<int64_t> out(models.front().size(), 0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t l = 0; l < out.size(); ++l) {
      out[l] += TruncateScaled(weights[i] * models[i][l], prec);
    }
  }
  return out;
}

RoundResult ExecuteRound(const std::vector<std::vector<double>>& local_models,
                         const RoundTopology& g, const RoundParams& params) {
  const std::size_t n = g.n_nodes();
  CheckModels(local_models, n, params.weights.size());
  const std::size_t dim = local_models.front().size();
  const uint64_t p = params.prime.value();
  if (params.k == 0) {
    throw Error(ErrorCode::kBadParameters, "K must be positive");
  }
  for (NodeId i = 1; i <= n; ++i) {
    if (g.Degree(i) == 0) {
      throw Error(ErrorCode::kDisconnectedGraph,
                  "learner " + std::to_string(i) + " is isolated in round " +
                      std::to_string(params.round));
    }
  }
  if (!IsConnected(g)) {
    throw Error(ErrorCode::kDisconnectedGraph,
                "round " + std::to_string(params.round) +
                    " topology is disconnected");
  }

  RoundResult result;
  result.round = params.round;
  result.k = params.k;

  // Range check and encoding of the weighted secrets.
  std::vector<std::vector<uint64_t>> secrets(n, std::vector<uint64_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < dim; ++l) {
      const double theta = local_models[i][l];
      if (!(std::fabs(theta) <= params.theta_max)) {
        std::ostringstream msg;
        msg << "round " << params.round << ": learner " << i + 1
            << " coordinate " << l << " has |theta| = " << std::fabs(theta)
            << " above theta_max = " << params.theta_max;
        throw Error(ErrorCode::kRangeViolation, msg.str());
      }
      try {
        secrets[i][l] = EncodeFixed(params.weights[i] * theta,
                                    params.precision, params.prime)
                            .z.value();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kOutOfRange) throw;
        throw Error(ErrorCode::kRangeViolation,
                    "round " + std::to_string(params.round) + ": learner " +
                        std::to_string(i + 1) + ": " + e.what());
      }
    }
  }

  auto t0 = Clock::now();
  const WeightMatrix a = MetropolisHastingsWeights(g);
  result.lambda2 = SecondLargestEigenvalue(a);
  result.timings.weights = Seconds(t0);

  // Share generation: learner i shares each coordinate with a polynomial of
  // degree |N_i| over its closed neighborhood and pre-multiplies every share
  // by the holder's Lagrange coefficient.
  t0 = Clock::now();
  std::vector<std::vector<NodeId>> closed(n);
  for (NodeId i = 1; i <= n; ++i) closed[i - 1] = ClosedNeighborhood(g, i);
  std::vector<std::vector<ShareBundle>> outgoing(n);
  ParallelFor(n, [&](std::size_t idx) {
    const auto i = static_cast<NodeId>(idx + 1);
    const auto& holders = closed[idx];
    const ShareholderSet c(std::vector<uint64_t>(holders.begin(), holders.end()),
                           params.prime);
    const std::vector<FieldElement> deltas = LagrangeDeltas(c);
    const int tau = static_cast<int>(g.Degree(i));
    auto& bundles = outgoing[idx];
    bundles.resize(holders.size());
    for (std::size_t h = 0; h < holders.size(); ++h) {
      bundles[h] = {i, holders[h], params.round, std::vector<uint64_t>(dim)};
    }
    std::vector<uint64_t> coeffs(static_cast<std::size_t>(tau) + 1);
    for (std::size_t l = 0; l < dim; ++l) {
      DeterministicRng rng = DeterministicRng::ForStream(
          params.seed, StreamTag::kShares, {params.round, i, l});
      const SharingPolynomial poly = SampleSharingPolynomial(
          FieldElement(secrets[idx][l], params.prime), tau, rng);
      for (std::size_t m = 0; m < coeffs.size(); ++m) {
        coeffs[m] = poly.coefficients()[m].value();
      }
      for (std::size_t h = 0; h < holders.size(); ++h) {
        uint64_t v = 0;
        for (std::size_t m = coeffs.size(); m-- > 0;) {
          v = (MulMod(v, holders[h], p) + coeffs[m]) % p;
        }
        bundles[h].values[l] = MulMod(v, deltas[h].value(), p);
      }
    }
  });
  result.timings.shares = Seconds(t0);

  // Barrier: every bundle is delivered before any initial state is formed.
  t0 = Clock::now();
  StateMatrix s0(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  ParallelFor(n, [&](std::size_t idx) {
    const auto i = static_cast<NodeId>(idx + 1);
    std::vector<const ShareBundle*> received;
    received.reserve(closed[idx].size());
    for (NodeId j : closed[idx]) {
      const auto& from = closed[j - 1];
      const auto pos = static_cast<std::size_t>(
          std::lower_bound(from.begin(), from.end(), i) - from.begin());
      received.push_back(&outgoing[j - 1][pos]);
    }
    const auto state = BuildInitialState(received, i, g, params.prime, dim);
    for (std::size_t l = 0; l < dim; ++l) {
      s0(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(l)) =
          static_cast<double>(state[l].value());
    }
  });
  // Exact integer sum of the initial states per coordinate.
  std::vector<double> s0_sum(dim);
  for (std::size_t l = 0; l < dim; ++l) {
    uint64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += static_cast<uint64_t>(
          s0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)));
    }
    s0_sum[l] = static_cast<double>(total);
  }
  result.timings.initial_state = Seconds(t0);

  // Consensus.
  t0 = Clock::now();
  const auto& coords = params.trajectory_coordinates;
  for (std::size_t l : coords) {
    if (l < dim) result.trajectory_coordinates.push_back(l);
  }
  auto snapshot = [&](const StateMatrix& m, std::size_t k) {
    if (result.trajectory_coordinates.empty()) return;
    StateVector sv;
    sv.iteration = k;
    sv.values.resize(m.rows(),
                     static_cast<Eigen::Index>(
                         result.trajectory_coordinates.size()));
    for (std::size_t c = 0; c < result.trajectory_coordinates.size(); ++c) {
      sv.values.col(static_cast<Eigen::Index>(c)) =
          m.col(static_cast<Eigen::Index>(result.trajectory_coordinates[c]));
    }
    result.trajectory.push_back(std::move(sv));
  };
  const bool record_messages = params.transcript != TranscriptLevel::kNone;
  const bool record_all = params.transcript == TranscriptLevel::kFull;
  StateMatrix current = s0;
  StateMatrix next(current.rows(), current.cols());
  snapshot(current, 0);
  if (record_messages) result.transcript.states.push_back(s0);
  for (std::size_t k = 1; k <= params.k; ++k) {
    ConsensusStepInto(current, a, next);
    std::swap(current, next);
    snapshot(current, k);
    if (record_all && k < params.k) result.transcript.states.push_back(current);
  }
  result.timings.consensus = Seconds(t0);

  // Reconstruction: z = round(N s_i(K)) mod p, then signed decode.
  t0 = Clock::now();
  const double big_n = static_cast<double>(n);
  result.decoded_units.assign(n, std::vector<int64_t>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < dim; ++l) {
      const double x = big_n * current(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(l));
      result.rounding_margin =
          std::max(result.rounding_margin, std::fabs(x - s0_sum[l]));
      result.decoded_units[i][l] =
          DecodeSignedUnits(FieldElement(RoundToResidue(x, p), params.prime));
    }
  }
  result.timings.reconstruct = Seconds(t0);

  result.oracle_units =
      QuantizedOracle(local_models, params.weights, params.precision);
  result.agreement = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (result.decoded_units[i] != result.decoded_units[0]) {
      result.agreement = false;
    }
    for (std::size_t l = 0; l < dim; ++l) {
      const int64_t d = result.decoded_units[i][l] - result.oracle_units[l];
      result.max_deviation_units =
          std::max(result.max_deviation_units, d < 0 ? -d : d);
    }
  }

  if (record_messages) {
    RoundTranscript& tr = result.transcript;
    tr.round = params.round;
    tr.topology = g;
    tr.topology.set_round_index(params.round);
    tr.k = params.k;
    tr.lambda2 = result.lambda2;
    for (auto& bundles : outgoing) {
      for (auto& b : bundles) tr.shares.push_back(std::move(b));
    }
    tr.decoded_units = result.decoded_units;
    tr.ground_truth = std::move(secrets);
  }
  return result;
}

int64_t TrainingResult::max_deviation_units() const {
  int64_t m = 0;
  for (const auto& r : rounds) m = std::max(m, r.max_deviation_units);
  return m;
}

double TrainingResult::max_rounding_margin() const {
  double m = 0;
  for (const auto& r : rounds) m = std::max(m, r.rounding_margin);
  return m;
}

bool TrainingResult::all_agree() const {
  return std::all_of(rounds.begin(), rounds.end(),
                     [](const RoundResult& r) { return r.agreement; });
}

std::size_t ChooseIterations(const ProtocolConfig& cfg, const WeightMatrix& a,
                             std::size_t global_k) {
  switch (cfg.k_policy.mode) {
    case KPolicyMode::kAuto:
      return MinIterations(a, cfg.modulus(), a.size());
    case KPolicyMode::kGlobal:
      return global_k;
    case KPolicyMode::kFixed:
      break;
  }
  const std::size_t k = cfg.k_policy.fixed_k;
  if (!SatisfiesIterationBound(a, cfg.prime, k)) {
    std::ostringstream msg;
    msg << "K=" << k
        << " violates the iteration bound 2p*sqrt(N)*||N*A^K - 1 1^T|| < 1";
    try {
      msg << " (minimal K for this graph is "
          << MinIterations(a, cfg.modulus(), a.size()) << ")";
    } catch (const Error&) {
    }
    throw Error(ErrorCode::kBoundViolation, msg.str());
  }
  return k;
}

std::size_t ScheduleIterations(const TopologySchedule& schedule,
                               std::size_t rounds, PrimeModulus p) {
  std::size_t k = 1;
  for (std::size_t t = 1; t <= rounds; ++t) {
    const WeightMatrix a = MetropolisHastingsWeights(schedule.ForRound(t));
    k = std::max(k, MinIterations(a, p, a.size()));
  }
  return k;
}

std::vector<std::vector<double>> InitialModels(const ProtocolConfig& cfg) {
  if (cfg.initial_models) return *cfg.initial_models;
  const Precision prec = cfg.precision();
  std::vector<std::vector<double>> models(cfg.n_learners);
  for (std::size_t i = 0; i < cfg.n_learners; ++i) {
    DeterministicRng rng =
        DeterministicRng::ForStream(cfg.seed, StreamTag::kInitialModel, {i + 1});
    for (std::size_t l = 0; l < cfg.model_dim; ++l) {
      const double x = rng.UniformReal(-cfg.theta_max / 2, cfg.theta_max / 2);
      models[i].push_back(static_cast<double>(TruncateScaled(x, prec)) /
                          static_cast<double>(prec.scale()));
    }
  }
  return models;
}

TrainingResult RunTraining(const ProtocolConfig& cfg,
                           const TrainerHook& trainer,
                           const TopologySchedule& schedule) {
  ValidateConfig(cfg);
  schedule.Validate(cfg.rounds);
  const Precision prec = cfg.precision();
  TrainingResult out;
  out.transcript.prime = cfg.prime;
  out.transcript.sigma = cfg.sigma;
  out.transcript.n_learners = cfg.n_learners;
  out.transcript.model_dim = cfg.model_dim;

  const std::size_t global_k =
      cfg.k_policy.mode == KPolicyMode::kGlobal
          ? ScheduleIterations(schedule, cfg.rounds, cfg.modulus())
          : 0;

  std::vector<std::vector<double>> initial = InitialModels(cfg);
  for (std::size_t t = 1; t <= cfg.rounds; ++t) {
    const RoundTopology g = schedule.ForRound(t);
    std::vector<std::vector<double>> local(cfg.n_learners);
    for (std::size_t i = 0; i < cfg.n_learners; ++i) {
      DeterministicRng rng =
          DeterministicRng::ForStream(cfg.seed, StreamTag::kTrainer, {t, i + 1});
      local[i] = trainer(static_cast<NodeId>(i + 1), t, initial[i], rng);
      if (local[i].size() != cfg.model_dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "trainer output for learner " + std::to_string(i + 1) +
                        " has the wrong dimension");
      }
    }
    if (!IsConnected(g)) {
      throw Error(ErrorCode::kDisconnectedGraph,
                  "round " + std::to_string(t) + " topology is disconnected");
    }
    std::size_t k = 0;
    try {
      k = ChooseIterations(cfg, MetropolisHastingsWeights(g), global_k);
    } catch (const Error& e) {
      throw Error(e.code(), "round " + std::to_string(t) + ": " + e.what());
    }

    RoundParams params{t,
                       cfg.modulus(),
                       prec,
                       cfg.weights,
                       cfg.theta_max,
                       cfg.seed,
                       k,
                       cfg.transcript,
                       cfg.trajectory_coordinates};
    RoundResult r = ExecuteRound(local, g, params);
    for (std::size_t i = 0; i < cfg.n_learners; ++i) {
      initial[i] = r.DecodedModel(static_cast<NodeId>(i + 1), prec);
    }
    out.global_units.push_back(r.decoded_units.front());
    out.timings += r.timings;
    if (cfg.transcript != TranscriptLevel::kNone) {
      out.transcript.rounds.push_back(std::move(r.transcript));
      r.transcript = RoundTranscript{};
    }
    out.rounds.push_back(std::move(r));
  }
  return out;
}

TrainingResult RunTraining(const ProtocolConfig& cfg) {
  return RunTraining(cfg, MakeTrainer(cfg), cfg.schedule);
}

ReplayReport ReplayTranscript(const Transcript& transcript) {
  ReplayReport report;
  const PrimeModulus p(transcript.prime);
  const std::size_t n = transcript.n_learners;
  const std::size_t dim = transcript.model_dim;
  auto mismatch = [&](const std::string& what) {
    report.matches = false;
    report.mismatches.push_back(what);
  };
  for (const auto& r : transcript.rounds) {
    const std::string tag = "round " + std::to_string(r.round) + ": ";
    if (r.states.empty()) {
      throw Error(ErrorCode::kTranscriptIncomplete,
                  tag + "no initial states recorded");
    }
    if (r.topology.n_nodes() != n) {
      throw Error(ErrorCode::kTranscriptIncomplete,
                  tag + "topology size differs from the header");
    }
    if (!r.shares.empty()) {
      for (NodeId i = 1; i <= n; ++i) {
        const auto bundles = r.BundlesFor(i);
        const auto state = BuildInitialState(bundles, i, r.topology, p, dim);
        for (std::size_t l = 0; l < dim; ++l) {
          if (static_cast<double>(state[l].value()) !=
              r.states[0](i - 1, static_cast<Eigen::Index>(l))) {
            mismatch(tag + "initial state of learner " + std::to_string(i) +
                     " differs from its shares");
          }
        }
      }
    }
    const WeightMatrix a = MetropolisHastingsWeights(r.topology);
    StateMatrix current = r.states[0];
    StateMatrix next(current.rows(), current.cols());
    for (std::size_t k = 1; k <= r.k; ++k) {
      ConsensusStepInto(current, a, next);
      std::swap(current, next);
      if (k < r.states.size() && current != r.states[k]) {
        mismatch(tag + "state at k=" + std::to_string(k) + " differs");
      }
    }
    if (!r.decoded_units.empty()) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < dim; ++l) {
          const double x = static_cast<double>(n) *
                           current(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(l));
          const int64_t units = DecodeSignedUnits(
              FieldElement(RoundToResidue(x, p.value()), p));
          if (units != r.decoded_units[i].at(l)) {
            mismatch(tag + "decoded output of learner " + std::to_string(i + 1) +
                     " differs");
          }
        }
      }
    }
    ++report.rounds_checked;
  }
  return report;
}

void WriteRoundTrajectoryCsv(std::ostream& out, const RoundResult& r) {
  const auto old_precision = out.precision(17);
  for (const auto& snap : r.trajectory) {
    for (Eigen::Index i = 0; i < snap.values.rows(); ++i) {
      for (std::size_t c = 0; c < r.trajectory_coordinates.size(); ++c) {
        out << r.round << ',' << snap.iteration << ',' << i + 1 << ','
            << r.trajectory_coordinates[c] << ','
            << snap.values(i, static_cast<Eigen::Index>(c)) << '\n';
      }
    }
  }
  out.precision(old_precision);
}

void WriteDecodedCsv(std::ostream& out, const RoundResult& r,
                     const Precision& prec) {
  for (std::size_t i = 0; i < r.decoded_units.size(); ++i) {
    for (std::size_t l = 0; l < r.decoded_units[i].size(); ++l) {
      out << r.round << ',' << i + 1 << ',' << l << ','
          << FormatUnits(r.decoded_units[i][l], prec) << '\n';
    }
  }
}

}  // namespace ppdfl
