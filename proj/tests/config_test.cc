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

#include "ppdfl/config.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "ppdfl/error.h"
#include "test_util.h"

namespace ppdfl {
namespace {

using ::nlohmann::json;
using ::ppdfl::testing_util::CodeOf;
using ::testing::HasSubstr;

json BaseDoc() {
  return json::parse(R"({
    "n_learners": 4, "model_dim": 3, "sigma": 2, "prime": 8009,
    "rounds": 3, "k_policy": "auto", "weights": "uniform",
    "theta_max": 10, "seed": 7, "schedule": "ring"
  })");
}

class ConfigFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ppdfl_config_test_" +
            std::string(::testing::UnitTest::GetInstance()
                            ->current_test_info()
                            ->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::filesystem::path Write(const std::string& name,
                              const std::string& body) {
    const auto path = dir_ / name;
    std::ofstream(path) << body;
    return path;
  }

  std::filesystem::path dir_;
};

TEST(ParseConfigTest, Defaults) {
  const auto cfg = ParseConfig(BaseDoc());
  EXPECT_EQ(cfg.n_learners, 4u);
  EXPECT_EQ(cfg.k_policy.mode, KPolicyMode::kAuto);
  EXPECT_THAT(cfg.weights, ::testing::Each(0.25));
  EXPECT_EQ(cfg.transcript, TranscriptLevel::kFull);
  EXPECT_EQ(cfg.trainer.kind, TrainerKind::kSynthetic);
  EXPECT_FALSE(cfg.schedule.is_explicit());
  EXPECT_EQ(cfg.schedule_json, "ring");
  EXPECT_NO_THROW(ValidateConfig(cfg));
}

TEST(ParseConfigTest, KPolicyForms) {
  auto doc = BaseDoc();
  doc["k_policy"] = "global";
  EXPECT_EQ(ParseConfig(doc).k_policy.mode, KPolicyMode::kGlobal);
  doc["k_policy"] = 12;
  const auto cfg = ParseConfig(doc);
  EXPECT_EQ(cfg.k_policy.mode, KPolicyMode::kFixed);
  EXPECT_EQ(cfg.k_policy.fixed_k, 12u);
  doc["k_policy"] = 0;
  EXPECT_EQ(CodeOf([&] { ParseConfig(doc); }), ErrorCode::kConfig);
  doc["k_policy"] = "sometimes";
  EXPECT_EQ(CodeOf([&] { ParseConfig(doc); }), ErrorCode::kConfig);
}

TEST(ParseConfigTest, MissingAndMistypedFields) {
  auto doc = BaseDoc();
  doc.erase("prime");
  try {
    ParseConfig(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    EXPECT_THAT(e.what(), HasSubstr("prime"));
  }
  doc = BaseDoc();
  doc["sigma"] = -1;
  EXPECT_EQ(CodeOf([&] { ParseConfig(doc); }), ErrorCode::kConfig);
  doc = BaseDoc();
  doc["schedule"] = "random:1";
  EXPECT_EQ(CodeOf([&] { ValidateConfig(ParseConfig(doc)); }),
            ErrorCode::kConfig);
  doc = BaseDoc();
  doc["transcript"] = "partial";
  EXPECT_EQ(CodeOf([&] { ParseConfig(doc); }), ErrorCode::kConfig);
}

TEST(ParseConfigTest, InlineScheduleAndOptionalFields) {
  auto doc = BaseDoc();
  doc["rounds"] = 2;
  doc["schedule"] = json::parse("[[[1,2],[2,3],[3,4]], [[1,2],[1,3],[1,4]]]");
  doc["weights"] = {0.1, 0.2, 0.3, 0.4};
  doc["initial_models"] = json::parse("[[0,0,0],[1,1,1],[2,2,2],[3,3,3]]");
  doc["trainer"] = {{"kind", "constant"}};
  doc["trajectory_coordinates"] = {0, 2};
  doc["transcript"] = "messages";
  const auto cfg = ParseConfig(doc);
  EXPECT_TRUE(cfg.schedule.is_explicit());
  EXPECT_TRUE(cfg.schedule.ForRound(2).HasEdge(1, 4));
  EXPECT_FALSE(cfg.schedule.ForRound(1).HasEdge(1, 4));
  EXPECT_EQ(cfg.trainer.kind, TrainerKind::kConstant);
  EXPECT_THAT(cfg.trajectory_coordinates, ::testing::ElementsAre(0, 2));
  EXPECT_EQ(cfg.transcript, TranscriptLevel::kMessages);
  ASSERT_TRUE(cfg.initial_models.has_value());
  EXPECT_EQ((*cfg.initial_models)[3][1], 3.0);
  EXPECT_NO_THROW(ValidateConfig(cfg));
}

TEST(ValidateConfigTest, StructuralErrors) {
  auto base = ParseConfig(BaseDoc());
  auto cfg = base;
  cfg.weights = {0.5, 0.5, 0.5, -0.5};
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kConfig);
  cfg = base;
  cfg.weights = {0.3, 0.3, 0.3, 0.3};
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kConfig);
  cfg = base;
  cfg.prime = 8000;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kConfig);
  cfg = base;
  cfg.trajectory_coordinates = {3};
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kConfig);
  cfg = base;
  cfg.initial_models = std::vector<std::vector<double>>(4, {1.0});
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kConfig);
  cfg = base;
  cfg.schedule = TopologySchedule::Explicit(
      {RoundTopology(4, {{1, 2}, {3, 4}})});
  cfg.rounds = 1;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kConfig);
}

TEST(ValidateConfigTest, PrimeBoundNamesInequality) {
  auto cfg = ParseConfig(BaseDoc());
  // 1 + 2 * 100 * 4 * 10 = 8001, so 8009 passes and 7993 fails.
  cfg.prime = 7993;
  try {
    ValidateConfig(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBoundViolation);
    EXPECT_THAT(e.what(), HasSubstr("p > max{N, 1 + 2*10^sigma*N*theta_max}"));
    EXPECT_THAT(e.what(), HasSubstr("8001"));
  }
  cfg.prime = 5;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(cfg); }), ErrorCode::kBoundViolation);
}

TEST(ConfigRoundTripTest, ToJsonParsesBack) {
  auto doc = BaseDoc();
  doc["schedule"] = "random:2.5";
  doc["trainer"] = {{"kind", "synthetic"}, {"noise", 0.5}};
  const auto cfg = ParseConfig(doc);
  const auto again = ParseConfig(ConfigToJson(cfg));
  EXPECT_EQ(ConfigToJson(again), ConfigToJson(cfg));
  for (std::size_t t = 1; t <= 3; ++t) {
    EXPECT_EQ(again.schedule.ForRound(t).edges(),
              cfg.schedule.ForRound(t).edges());
  }
}

TEST(ConfigRoundTripTest, OverrideSeedReseedsGenerator) {
  auto doc = BaseDoc();
  doc["n_learners"] = 12;
  doc["prime"] = 24019;
  doc["schedule"] = "random:3";
  auto cfg = ParseConfig(doc);
  const auto before = cfg.schedule.ForRound(1).edges();
  OverrideSeed(cfg, 99);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_NE(cfg.schedule.ForRound(1).edges(), before);
  doc["seed"] = 99;
  EXPECT_EQ(ParseConfig(doc).schedule.ForRound(1).edges(),
            cfg.schedule.ForRound(1).edges());
}

TEST_F(ConfigFileTest, RelativeScheduleFiles) {
  Write("graph.txt", "1 2\n2 3\n3 4\n");
  Write("rounds.json", "[[[1,2],[2,3],[3,4],[1,4]], [[1,2],[1,3],[1,4]]]");
  auto doc = BaseDoc();
  doc["schedule"] = "graph.txt";
  Write("a.json", doc.dump());
  auto cfg = LoadConfig(dir_ / "a.json");
  EXPECT_TRUE(cfg.schedule.ForRound(3).HasEdge(3, 4));
  EXPECT_FALSE(cfg.schedule.ForRound(2).HasEdge(1, 4));

  doc["rounds"] = 2;
  doc["schedule"] = {{"file", "rounds.json"}};
  Write("b.json", doc.dump());
  cfg = LoadConfig(dir_ / "b.json");
  EXPECT_TRUE(cfg.schedule.ForRound(1).HasEdge(1, 4));
  EXPECT_TRUE(cfg.schedule.ForRound(2).HasEdge(1, 3));
  EXPECT_NO_THROW(ValidateConfig(cfg));

  doc["schedule"] = "absent.json";
  Write("c.json", doc.dump());
  EXPECT_EQ(CodeOf([&] { LoadConfig(dir_ / "c.json"); }), ErrorCode::kConfig);
  Write("d.json", "{not json");
  EXPECT_EQ(CodeOf([&] { LoadConfig(dir_ / "d.json"); }), ErrorCode::kConfig);
}

TEST(ShippedConfigsTest, LoadAndValidate) {
  const std::filesystem::path root(PPDFL_SOURCE_DIR);
  for (const char* name : {"toy.json", "paper.json", "random_mid.json",
                           "ring_star_privacy.json"}) {
    SCOPED_TRACE(name);
    const auto cfg = LoadConfig(root / "configs" / name);
    EXPECT_NO_THROW(ValidateConfig(cfg));
  }
  const auto bad = LoadConfig(root / "configs" / "bad_prime.json");
  EXPECT_EQ(CodeOf([&] { ValidateConfig(bad); }), ErrorCode::kBoundViolation);
}

}  // namespace
}  // namespace ppdfl
