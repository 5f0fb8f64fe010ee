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

#include <cstdlib>
#include <random>
#include <sstream>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "ppdfl/error.h"
#include "ppdfl/secret_sharing.h"
#include "test_util.h"

namespace ppdfl {
namespace {

using ::ppdfl::testing_util::CodeOf;
using ::testing::Each;
using ::testing::ElementsAre;

RoundParams Params(uint64_t p, int sigma, std::vector<double> weights,
                   double theta_max, std::size_t k) {
  RoundParams params;
  params.prime = PrimeModulus(p);
  params.precision = Precision(sigma);
  params.weights = std::move(weights);
  params.theta_max = theta_max;
  params.seed = 5;
  params.k = k;
  return params;
}

std::size_t AutoK(const RoundTopology& g, uint64_t p) {
  return MinIterations(MetropolisHastingsWeights(g), PrimeModulus(p),
                       g.n_nodes());
}

ProtocolConfig SmallConfig(std::size_t n, std::size_t dim, int sigma,
                           std::size_t rounds, uint64_t seed) {
  ProtocolConfig cfg;
  cfg.n_learners = n;
  cfg.model_dim = dim;
  cfg.sigma = sigma;
  cfg.theta_max = 10;
  cfg.prime = NextPrime(static_cast<uint64_t>(
      1 + 2 * Precision(sigma).scale() * static_cast<int64_t>(n) * 10));
  cfg.rounds = rounds;
  cfg.weights.assign(n, 1.0 / static_cast<double>(n));
  cfg.seed = seed;
  cfg.schedule = MakeGeneratedSchedule(
      {TopologyKind::kRandomConnected, 2.5}, n, seed);
  cfg.schedule_json = "random:2.5";
  return cfg;
}

TEST(BuildInitialStateTest, SpecExamples) {
  const PrimeModulus p(11);
  const RoundTopology path(3, {{1, 2}, {2, 3}});
  const RoundTopology pair(2, {{1, 2}});
  ShareBundle self{1, 1, 1, {7}};
  ShareBundle other{2, 1, 1, {3}};
  const ShareBundle* both[] = {&self, &other};
  EXPECT_EQ(BuildInitialState(both, 1, pair, p, 1)[0].value(), 10u);

  ShareBundle b1{1, 2, 1, {8}}, b2{2, 2, 1, {5}}, b3{3, 2, 1, {9}};
  const ShareBundle* three[] = {&b1, &b2, &b3};
  EXPECT_EQ(BuildInitialState(three, 2, path, p, 1)[0].value(), 0u);

  const ShareBundle* missing[] = {&b1, &b2};
  try {
    BuildInitialState(missing, 2, path, p, 1);
    FAIL() << "expected MissingBundle";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingBundle);
    EXPECT_THAT(e.what(), ::testing::HasSubstr("learner 3"));
  }
}

TEST(ExecuteRoundTest, PathWithIntegers) {
  const RoundTopology path(3, {{1, 2}, {2, 3}});
  auto params = Params(101, 0, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 10, 0);
  params.k = AutoK(path, 101);
  const auto r = ExecuteRound({{3}, {6}, {-3}}, path, params);
  EXPECT_THAT(r.decoded_units, Each(ElementsAre(2)));
  EXPECT_EQ(r.max_deviation_units, 0);
  EXPECT_TRUE(r.agreement);
  EXPECT_LT(r.rounding_margin, 0.5);
}

TEST(ExecuteRoundTest, AllZeroModels) {
  const RoundTopology ring(4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
  auto params = Params(8009, 2, std::vector<double>(4, 0.25), 10, 0);
  params.k = AutoK(ring, 8009);
  const auto r = ExecuteRound({{0, 0}, {0, 0}, {0, 0}, {0, 0}}, ring, params);
  EXPECT_THAT(r.decoded_units, Each(ElementsAre(0, 0)));
}

TEST(ExecuteRoundTest, TwoLearnersHundredths) {
  const RoundTopology pair(2, {{1, 2}});
  auto params = Params(1009, 2, {0.5, 0.5}, 2, 1);
  const auto r = ExecuteRound({{1.25}, {-0.75}}, pair, params);
  EXPECT_THAT(r.decoded_units, Each(ElementsAre(25)));
  EXPECT_THAT(r.oracle_units, ElementsAre(25));
  EXPECT_DOUBLE_EQ(r.DecodedModel(1, params.precision)[0], 0.25);
}

TEST(ExecuteRoundTest, RejectsOutOfRangeAndDisconnected) {
  const RoundTopology pair(2, {{1, 2}});
  auto params = Params(1009, 2, {0.5, 0.5}, 1, 1);
  EXPECT_EQ(CodeOf([&] { ExecuteRound({{1.5}, {0}}, pair, params); }),
            ErrorCode::kRangeViolation);
  const RoundTopology lonely(3, {{1, 2}});
  auto params3 = Params(1009, 2, {0.2, 0.3, 0.5}, 1, 1);
  EXPECT_EQ(CodeOf([&] { ExecuteRound({{0}, {0}, {0}}, lonely, params3); }),
            ErrorCode::kDisconnectedGraph);
  EXPECT_EQ(CodeOf([&] { ExecuteRound({{0}, {0, 1}}, pair, params); }),
            ErrorCode::kDimensionMismatch);
}

// Encoding leaves the signed range even though |theta| <= theta_max when
// the prime is too small for the configured magnitude.
TEST(ExecuteRoundTest, EncodingOverflowIsRangeViolation) {
  const RoundTopology pair(2, {{1, 2}});
  auto params = Params(11, 2, {0.5, 0.5}, 10, 1);
  EXPECT_EQ(CodeOf([&] { ExecuteRound({{9}, {0}}, pair, params); }),
            ErrorCode::kRangeViolation);
}

TEST(ExecuteRoundTest, InitialStatesSumToSecretsModP) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng() % 8;
    const auto adj = oracle::RandomConnectedGraph(n, rng() % n, rng);
    std::vector<Edge> edges;
    for (const auto& e : oracle::EdgesOf(adj)) edges.push_back(e);
    const RoundTopology g(n, edges);
    const uint64_t p = NextPrime(1 + 2 * 100 * n * 10);
    auto params = Params(p, 2, std::vector<double>(n, 1.0 / n), 10, 0);
    params.k = AutoK(g, p);
    params.seed = rng();
    std::vector<std::vector<double>> models(n);
    for (auto& m : models) {
      for (int l = 0; l < 3; ++l) {
        m.push_back(static_cast<double>(static_cast<int64_t>(rng() % 2001) - 1000) /
                    100.0);
      }
    }
    const auto r = ExecuteRound(models, g, params);
    const auto& tr = r.transcript;
    ASSERT_TRUE(tr.ground_truth.has_value());
    for (std::size_t l = 0; l < 3; ++l) {
      uint64_t states = 0, secrets = 0;
      for (std::size_t i = 0; i < n; ++i) {
        states = (states + static_cast<uint64_t>(
                               tr.states[0](static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(l)))) % p;
        secrets = (secrets + (*tr.ground_truth)[i][l]) % p;
      }
      ASSERT_EQ(states, secrets);
    }
    // Each learner's weighted shares sum to its own secret.
    for (NodeId i = 1; i <= n; ++i) {
      uint64_t sum = 0;
      for (const auto& b : tr.shares) {
        if (b.sender == i) sum = (sum + b.values[1]) % p;
      }
      ASSERT_EQ(sum, (*tr.ground_truth)[i - 1][1]);
    }
    ASSERT_EQ(r.max_deviation_units, 0);
  }
}

// Shares match an independent evaluation of the sampled polynomial.
TEST(ExecuteRoundTest, BundlesFollowPolynomialStream) {
  const RoundTopology g(4, {{1, 2}, {2, 3}, {3, 4}, {2, 4}});
  auto params = Params(8009, 2, std::vector<double>(4, 0.25), 10, 30);
  params.round = 3;
  const auto r = ExecuteRound({{1}, {2}, {-3}, {4.5}}, g, params);
  const NodeId sender = 2;
  const std::vector<uint64_t> holders{1, 2, 3, 4};
  DeterministicRng rng =
      DeterministicRng::ForStream(params.seed, StreamTag::kShares, {3, 2, 0});
  const PrimeModulus p(8009);
  const auto poly = SampleSharingPolynomial(
      FieldElement((*r.transcript.ground_truth)[1][0], p), 3, rng);
  for (const auto& b : r.transcript.shares) {
    if (b.sender != sender) continue;
    const uint64_t delta =
        oracle::LagrangeAtZero(holders, b.receiver, p.value());
    EXPECT_EQ(b.values[0], poly.Evaluate(b.receiver).value() * delta % 8009);
  }
}

TEST(ExecuteRoundTest, TopologyDoesNotChangeOutput) {
  const std::vector<std::vector<double>> models{
      {1.11, -2.5}, {0.07, 3.33}, {-4.2, 0.01}, {2.2, -0.99}, {0.5, 0.5}};
  const std::vector<double> w{0.1, 0.2, 0.3, 0.25, 0.15};
  std::vector<std::vector<int64_t>> outputs;
  for (auto kind : {TopologyKind::kComplete, TopologyKind::kStar,
                    TopologyKind::kLine, TopologyKind::kRing}) {
    const auto g = GenerateTopology({kind}, 5, 0);
    auto params = Params(10007, 2, w, 10, 0);
    params.k = AutoK(g, 10007);
    const auto r = ExecuteRound(models, g, params);
    outputs.push_back(r.decoded_units[0]);
    EXPECT_EQ(r.max_deviation_units, 0);
  }
  EXPECT_THAT(outputs, Each(outputs.front()));
}

TEST(ExecuteRoundTest, ThreadCountDoesNotChangeResult) {
  const auto g = GenerateTopology({TopologyKind::kRandomConnected, 4}, 12, 3);
  std::vector<std::vector<double>> models(12, std::vector<double>(5));
  std::mt19937_64 rng(2);
  for (auto& m : models) {
    for (double& x : m) x = static_cast<double>(rng() % 1000) / 100.0 - 5;
  }
  auto params = Params(24019, 2, std::vector<double>(12, 1.0 / 12), 10, 0);
  params.k = AutoK(g, 24019);
  setenv("PPDFL_THREADS", "1", 1);
  const auto single = ExecuteRound(models, g, params);
  setenv("PPDFL_THREADS", "4", 1);
  const auto multi = ExecuteRound(models, g, params);
  unsetenv("PPDFL_THREADS");
  EXPECT_EQ(single.decoded_units, multi.decoded_units);
  ASSERT_EQ(single.transcript.shares.size(), multi.transcript.shares.size());
  for (std::size_t k = 0; k < single.transcript.shares.size(); ++k) {
    EXPECT_EQ(single.transcript.shares[k].values,
              multi.transcript.shares[k].values);
  }
  EXPECT_EQ(single.transcript.states.back(), multi.transcript.states.back());
}

TEST(ExecuteRoundTest, TranscriptLevels) {
  const RoundTopology path(3, {{1, 2}, {2, 3}});
  auto params = Params(6007, 2, std::vector<double>(3, 1.0 / 3), 10, 0);
  params.k = AutoK(path, 6007);
  const std::vector<std::vector<double>> models{{1}, {2}, {3}};
  const auto full = ExecuteRound(models, path, params);
  EXPECT_EQ(full.transcript.states.size(), params.k);
  EXPECT_EQ(full.transcript.shares.size(), 7u);
  params.transcript = TranscriptLevel::kMessages;
  EXPECT_EQ(ExecuteRound(models, path, params).transcript.states.size(), 1u);
  params.transcript = TranscriptLevel::kNone;
  const auto none = ExecuteRound(models, path, params);
  EXPECT_TRUE(none.transcript.states.empty());
  EXPECT_TRUE(none.transcript.shares.empty());
  std::size_t messages = 0;
  full.transcript.ForEachStateMessage([&](const StateMessage&) { ++messages; });
  EXPECT_EQ(messages, 4 * params.k);
}

TEST(RunTrainingTest, SingleRoundEqualsExecuteRound) {
  ProtocolConfig cfg = SmallConfig(6, 2, 2, 1, 21);
  const auto run = RunTraining(cfg);
  const auto g = cfg.schedule.ForRound(1);
  std::vector<std::vector<double>> local;
  const auto initial = InitialModels(cfg);
  const auto trainer = MakeTrainer(cfg);
  for (NodeId i = 1; i <= 6; ++i) {
    DeterministicRng rng =
        DeterministicRng::ForStream(cfg.seed, StreamTag::kTrainer, {1, i});
    local.push_back(trainer(i, 1, initial[i - 1], rng));
  }
  RoundParams params{1, cfg.modulus(), cfg.precision(), cfg.weights,
                     cfg.theta_max, cfg.seed, run.rounds[0].k};
  const auto r = ExecuteRound(local, g, params);
  EXPECT_EQ(run.rounds[0].decoded_units, r.decoded_units);
}

TEST(RunTrainingTest, NextInitialModelIsDecodedOutput) {
  ProtocolConfig cfg = SmallConfig(5, 3, 2, 4, 8);
  std::vector<std::vector<std::vector<double>>> seen(5);
  const TrainerHook base = MakeTrainer(cfg);
  TrainerHook spy = [&](NodeId i, std::size_t t, std::span<const double> init,
                        DeterministicRng& rng) {
    seen[t].push_back(std::vector<double>(init.begin(), init.end()));
    return base(i, t, init, rng);
  };
  const auto run = RunTraining(cfg, spy, cfg.schedule);
  for (std::size_t t = 2; t <= 4; ++t) {
    for (const auto& init : seen[t]) {
      ASSERT_EQ(init, run.rounds[t - 2].DecodedModel(1, cfg.precision()));
    }
  }
  EXPECT_TRUE(run.all_agree());
  EXPECT_EQ(run.max_deviation_units(), 0);
}

TEST(RunTrainingTest, ConstantTrainerKeepsModelFixed) {
  // Weights and models chosen so every w_i * theta_i is exact at sigma = 2.
  ProtocolConfig cfg = SmallConfig(4, 2, 2, 5, 3);
  cfg.weights = {0.25, 0.25, 0.25, 0.25};
  cfg.initial_models = {{1, -2}, {1, -2}, {1, -2}, {1, -2}};
  cfg.trainer.kind = TrainerKind::kConstant;
  const auto run = RunTraining(cfg);
  for (const auto& g : run.global_units) EXPECT_THAT(g, ElementsAre(100, -200));
}

TEST(RunTrainingTest, ConstantTrainerReachesFixedPoint) {
  ProtocolConfig cfg = SmallConfig(3, 2, 2, 5, 4);
  cfg.schedule = MakeGeneratedSchedule({TopologyKind::kComplete}, 3, 4);
  cfg.trainer.kind = TrainerKind::kConstant;
  const auto run = RunTraining(cfg);
  for (std::size_t t = 2; t < run.global_units.size(); ++t) {
    EXPECT_EQ(run.global_units[t], run.global_units[1]);
  }
}

TEST(RunTrainingTest, SyntheticSixRoundsMatchOracle) {
  ProtocolConfig cfg = SmallConfig(12, 4, 3, 6, 77);
  cfg.prime = NextPrime(1 + 2 * 1000 * 12 * 10);
  const auto run = RunTraining(cfg);
  ASSERT_EQ(run.rounds.size(), 6u);
  for (const auto& r : run.rounds) {
    EXPECT_EQ(r.max_deviation_units, 0);
    for (const auto& d : r.decoded_units) EXPECT_EQ(d, r.oracle_units);
  }
}

TEST(RunTrainingTest, KPolicies) {
  ProtocolConfig cfg = SmallConfig(8, 1, 1, 3, 6);
  cfg.k_policy.mode = KPolicyMode::kGlobal;
  const auto global = RunTraining(cfg);
  const std::size_t expected =
      ScheduleIterations(cfg.schedule, 3, cfg.modulus());
  for (const auto& r : global.rounds) EXPECT_EQ(r.k, expected);

  cfg.k_policy = {KPolicyMode::kFixed, 1};
  EXPECT_EQ(CodeOf([&] { RunTraining(cfg); }), ErrorCode::kBoundViolation);
  cfg.k_policy = {KPolicyMode::kFixed, expected};
  EXPECT_EQ(RunTraining(cfg).max_deviation_units(), 0);
}

TEST(ReplayTranscriptTest, DetectsTampering) {
  ProtocolConfig cfg = SmallConfig(5, 2, 2, 2, 10);
  auto run = RunTraining(cfg);
  EXPECT_TRUE(ReplayTranscript(run.transcript).matches);
  run.transcript.rounds[1].shares[0].values[0] += 1;
  const auto report = ReplayTranscript(run.transcript);
  EXPECT_FALSE(report.matches);
  EXPECT_FALSE(report.mismatches.empty());
  run.transcript.rounds[0].states.clear();
  EXPECT_EQ(CodeOf([&] { ReplayTranscript(run.transcript); }),
            ErrorCode::kTranscriptIncomplete);
}

TEST(OutputCsvTest, DecodedRowsUseSigmaDigits) {
  const RoundTopology pair(2, {{1, 2}});
  auto params = Params(1009, 2, {0.5, 0.5}, 2, 1);
  const auto r = ExecuteRound({{1.25}, {-1.75}}, pair, params);
  std::ostringstream out;
  WriteDecodedCsv(out, r, params.precision);
  EXPECT_EQ(out.str(), "1,1,0,-0.25\n1,2,0,-0.25\n");
  std::ostringstream traj;
  WriteRoundTrajectoryCsv(traj, r);
  EXPECT_THAT(traj.str(), ::testing::StartsWith("1,0,1,0,"));
}

}  // namespace
}  // namespace ppdfl
