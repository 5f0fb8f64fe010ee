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

#include "ppdfl/privacy.h"

#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "ppdfl/error.h"
#include "test_util.h"

namespace ppdfl {
namespace {

using ::ppdfl::testing_util::CodeOf;
using ::ppdfl::testing_util::RunRounds;
using ::testing::ElementsAre;
using Sets = std::vector<std::vector<NodeId>>;

const RoundTopology kPath(3, {{1, 2}, {2, 3}});
const RoundTopology kRing(4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
const RoundTopology kStar(4, {{1, 2}, {1, 3}, {1, 4}});

RoundTopology FromAdjacency(const oracle::Adjacency& adj) {
  std::vector<Edge> edges;
  for (const auto& e : oracle::EdgesOf(adj)) edges.push_back(e);
  return RoundTopology(adj.size(), edges);
}

TEST(AdversarySetTest, ParseAndComplement) {
  const auto adv = AdversarySet::Parse("4,2", 5);
  EXPECT_THAT(adv.adversaries(), ElementsAre(2, 4));
  EXPECT_THAT(adv.benign(), ElementsAre(1, 3, 5));
  EXPECT_TRUE(adv.IsAdversarial(4));
  EXPECT_EQ(adv.BenignIndex(5), 2u);
  EXPECT_TRUE(AdversarySet::Parse("", 3).adversaries().empty());
  EXPECT_EQ(CodeOf([] { AdversarySet({1, 2, 3}, 3); }),
            ErrorCode::kBadParameters);
  EXPECT_EQ(CodeOf([] { AdversarySet({1, 1}, 3); }), ErrorCode::kBadParameters);
  EXPECT_EQ(CodeOf([] { AdversarySet({4}, 3); }), ErrorCode::kBadParameters);
  EXPECT_EQ(CodeOf([] { AdversarySet::Parse("1,x", 3); }),
            ErrorCode::kBadParameters);
}

TEST(SurroundedComponentsTest, Examples) {
  EXPECT_EQ(SurroundedComponents(kPath, AdversarySet({}, 3)).sets,
            (Sets{{1, 2, 3}}));
  const auto middle = SurroundedComponents(kPath, AdversarySet({2}, 3));
  EXPECT_EQ(middle.sets, (Sets{{1}, {3}}));
  EXPECT_THAT(middle.boundary, ElementsAre(ElementsAre(true), ElementsAre(true)));
  const auto end = SurroundedComponents(kPath, AdversarySet({3}, 3));
  EXPECT_EQ(end.sets, (Sets{{1, 2}}));
  EXPECT_THAT(end.boundary, ElementsAre(ElementsAre(false, true)));
  EXPECT_EQ(LiteralSurroundedSets(kPath, AdversarySet({2}, 3)),
            (Sets{{1}, {3}}));
}

TEST(PerfectSecrecyTest, Examples) {
  const std::vector<RoundTopology> rings(3, kRing);
  EXPECT_TRUE(PerfectSecrecy(rings, AdversarySet({}, 4)).perfect_secrecy);
  EXPECT_TRUE(PerfectSecrecy(rings, AdversarySet({1}, 4)).perfect_secrecy);

  const std::vector<RoundTopology> mixed{kRing, kStar};
  const auto verdict = PerfectSecrecy(mixed, AdversarySet({1}, 4));
  EXPECT_FALSE(verdict.perfect_secrecy);
  EXPECT_EQ(verdict.earliest_failing_round, 2u);
  EXPECT_EQ(verdict.witnesses, (Sets{{2}, {3}, {4}}));

  const auto schedule = TopologySchedule::Explicit(mixed);
  EXPECT_EQ(PerfectSecrecy(schedule, 1, AdversarySet({1}, 4)).perfect_secrecy,
            true);
  EXPECT_EQ(PerfectSecrecy(schedule, 2, AdversarySet({1}, 4))
                .earliest_failing_round,
            2u);
}

TEST(SecrecyCrossCheckTest, AllGraphsOnFourNodes) {
  for (const auto& adj : oracle::AllConnectedGraphs(4)) {
    const RoundTopology g = FromAdjacency(adj);
    for (unsigned mask = 0; mask < 15; ++mask) {
      std::vector<NodeId> ids;
      for (NodeId i = 1; i <= 4; ++i) {
        if (mask >> (i - 1) & 1) ids.push_back(i);
      }
      ASSERT_TRUE(SecrecyCrossCheck(g, AdversarySet(ids, 4)));
    }
  }
}

TEST(SecrecyCrossCheckTest, RandomEightNodeGraphs) {
  std::mt19937_64 rng(8);
  for (int seed = 0; seed < 100; ++seed) {
    const RoundTopology g = FromAdjacency(oracle::RandomConnectedGraph(8, seed % 9, rng));
    std::vector<NodeId> ids;
    for (NodeId i = 1; i <= 8; ++i) {
      if (rng() % 3 == 0) ids.push_back(i);
    }
    if (ids.size() == 8) ids.pop_back();
    ASSERT_TRUE(SecrecyCrossCheck(g, AdversarySet(ids, 8)));
  }
}

TEST(AdversaryInferTest, MiddleAdversaryLearnsBothEnds) {
  const auto t = RunRounds({kPath}, 1009, 3);
  const auto report = AdversaryInfer(t, AdversarySet({2}, 3));
  ASSERT_EQ(report.rounds.size(), 1u);
  const auto& r = report.rounds[0];
  EXPECT_THAT(r.individual_inferable, ElementsAre(true, true));
  const auto& truth = *t.rounds[0].ground_truth;
  EXPECT_EQ(r.Evaluate(std::vector<uint64_t>{1, 0}), truth[0][0]);
  EXPECT_EQ(r.Evaluate(std::vector<uint64_t>{0, 1}), truth[2][0]);
  EXPECT_TRUE(r.ground_truth_consistent);
  EXPECT_FALSE(report.verdict.perfect_secrecy);
}

TEST(AdversaryInferTest, EndAdversaryLearnsOnlyTheSum) {
  const auto t = RunRounds({kPath}, 1009, 4);
  const auto report = AdversaryInfer(t, AdversarySet({3}, 3));
  const auto& r = report.rounds[0];
  EXPECT_THAT(r.component_sum_inferable, ElementsAre(true));
  EXPECT_THAT(r.individual_inferable, ElementsAre(false, false));
  const auto& truth = *t.rounds[0].ground_truth;
  EXPECT_EQ(r.component_values[0], (truth[0][0] + truth[1][0]) % 1009);
  EXPECT_TRUE(r.SpanIsBenignSumOnly());
  EXPECT_TRUE(report.verdict.perfect_secrecy);
}

TEST(AdversaryInferTest, EmptyCoalitionSeesOnlyGlobalSum) {
  const auto t = RunRounds({kRing}, 1009, 5);
  const auto report = AdversaryInfer(t, AdversarySet({}, 4));
  const auto& r = report.rounds[0];
  EXPECT_TRUE(r.SpanIsBenignSumOnly());
  EXPECT_THAT(r.individual_inferable, ::testing::Each(false));
  EXPECT_FALSE(r.InSpan(std::vector<uint64_t>{1, 1, 0, 0}));
}

TEST(AdversaryInferTest, StarHubLeaksEveryLeaf) {
  const auto t = RunRounds({kRing, kStar}, 1009, 6);
  const auto report = AdversaryInfer(t, AdversarySet({1}, 4));
  ASSERT_EQ(report.rounds.size(), 2u);
  EXPECT_TRUE(report.rounds[0].SpanIsBenignSumOnly());
  const auto& star = report.rounds[1];
  EXPECT_THAT(star.individual_inferable, ElementsAre(true, true, true));
  std::size_t individuals = 0;
  for (const auto& leak : star.leaked) {
    if (leak.kind != FunctionalKind::kIndividual) continue;
    ++individuals;
    EXPECT_EQ(leak.matches_ground_truth, true);
  }
  EXPECT_EQ(individuals, 3u);

  const auto json = report.ToJson();
  EXPECT_EQ(json["perfect_secrecy"], false);
  EXPECT_EQ(json["earliest_failing_round"], 2);
  EXPECT_EQ(json["rounds"][1]["secrecy_verdict"], false);
  EXPECT_EQ(json["rounds"][1]["surrounded_sets"].size(), 3u);
}

TEST(AdversaryInferTest, MissingSharesAreIncomplete) {
  auto t = RunRounds({kPath}, 1009, 7);
  auto& shares = t.rounds[0].shares;
  std::erase_if(shares, [](const ShareBundle& b) {
    return b.sender == 1 && b.receiver == 2;
  });
  EXPECT_EQ(CodeOf([&] { AdversaryInfer(t, AdversarySet({2}, 3)); }),
            ErrorCode::kTranscriptIncomplete);
}

// Both directions of the leakage characterization on random instances,
// checked against an independently built observation system.
TEST(AdversaryInferTest, MatchesIndependentObservationSystem) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng() % 6;
    const auto adj = oracle::RandomConnectedGraph(n, rng() % n, rng);
    std::vector<bool> flags(n, false);
    std::vector<NodeId> ids;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 3 == 0) {
        flags[i] = true;
        ids.push_back(static_cast<NodeId>(i + 1));
      }
    }
    if (ids.size() == n) continue;
    const uint64_t p = NextPrime(1 + 200 * n);
    const auto t = RunRounds({FromAdjacency(adj)}, p, trial);
    const AdversarySet adv(ids, n);
    const auto r = AdversaryInfer(t, adv).rounds[0];
    const auto sys = oracle::BuildObservations(adj, flags, p);
    const std::size_t nb = adv.benign().size();
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<uint64_t> e(nb, 0);
      e[b] = 1;
      ASSERT_EQ(r.individual_inferable[b], oracle::Inferable(sys, e, p));
      ASSERT_EQ(r.InSpan(e), oracle::Inferable(sys, e, p));
    }
    for (std::size_t s = 0; s < r.decomposition.sets.size(); ++s) {
      std::vector<uint64_t> f(nb, 0);
      uint64_t truth = 0;
      for (NodeId i : r.decomposition.sets[s]) {
        f[adv.BenignIndex(i)] = 1;
        truth = (truth + (*t.rounds[0].ground_truth)[i - 1][0]) % p;
      }
      ASSERT_TRUE(oracle::Inferable(sys, f, p));
      ASSERT_TRUE(r.component_sum_inferable[s]);
      ASSERT_EQ(r.component_values[s], truth);
    }
    ASSERT_EQ(r.SpanIsBenignSumOnly(),
              PerfectSecrecy(std::vector<RoundTopology>{FromAdjacency(adj)},
                             adv)
                  .perfect_secrecy);
  }
}

}  // namespace
}  // namespace ppdfl
