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

#include "ppdfl/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace ppdfl {
namespace {

using ::testing::HasSubstr;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    out_dir_ = std::filesystem::temp_directory_path() /
               ("ppdfl_cli_test_" +
                std::string(::testing::UnitTest::GetInstance()
                                ->current_test_info()
                                ->name()));
    std::filesystem::remove_all(out_dir_);
  }
  void TearDown() override { std::filesystem::remove_all(out_dir_); }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return RunCli(args, out_, err_);
  }

  static std::string Config(const std::string& name) {
    return (std::filesystem::path(PPDFL_SOURCE_DIR) / "configs" / name)
        .string();
  }

  std::filesystem::path out_dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST(ExitCodeForTest, Mapping) {
  EXPECT_EQ(ExitCodeFor(ErrorCode::kConfig), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kTranscriptIncomplete), 2);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kBoundViolation), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kRangeViolation), 3);
  EXPECT_EQ(ExitCodeFor(ErrorCode::kMissingBundle), 5);
}

TEST_F(CliTest, SimulateToyWritesArtifacts) {
  ASSERT_EQ(Run({"simulate", "--config", Config("toy.json"), "--out",
                 out_dir_.string()}),
            0)
      << err_.str();
  for (const char* f : {"trajectories.csv", "decoded.csv", "transcript.jsonl",
                        "summary.json", "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out_dir_ / f)) << f;
  }
  std::ifstream summary_file(out_dir_ / "summary.json");
  const auto summary = nlohmann::json::parse(summary_file);
  EXPECT_EQ(summary["max_deviation_units"], 0);
  EXPECT_EQ(summary["exact"], true);
  EXPECT_EQ(summary["rounds"].size(), 3u);
  std::ifstream decoded(out_dir_ / "decoded.csv");
  std::string header;
  std::getline(decoded, header);
  EXPECT_EQ(header, "round,learner_id,coordinate,value");

  // Same seed, same transcript.
  std::ifstream first(out_dir_ / "transcript.jsonl");
  std::stringstream a;
  a << first.rdbuf();
  const auto again = out_dir_ / "again";
  ASSERT_EQ(Run({"simulate", "--config", Config("toy.json"), "--out",
                 again.string()}),
            0);
  std::ifstream second(again / "transcript.jsonl");
  std::stringstream b;
  b << second.rdbuf();
  EXPECT_EQ(a.str(), b.str());
}

TEST_F(CliTest, SimulateRejectsBadPrime) {
  EXPECT_EQ(Run({"simulate", "--config", Config("bad_prime.json"), "--out",
                 out_dir_.string()}),
            3);
  EXPECT_THAT(err_.str(), HasSubstr("prime bound violated"));
}

TEST_F(CliTest, MissingConfigAndBadUsage) {
  EXPECT_EQ(Run({"simulate", "--config", "/nonexistent.json", "--out",
                 out_dir_.string()}),
            2);
  EXPECT_EQ(Run({"simulate"}), 2);
  EXPECT_EQ(Run({"frobnicate"}), 2);
  EXPECT_EQ(Run({"--version"}), 0);
  EXPECT_THAT(out_.str(), HasSubstr(kVersion));
}

TEST_F(CliTest, SpectralStar) {
  ASSERT_EQ(Run({"spectral", "--topology", "star", "--n", "100", "--kmax",
                 "3"}),
            0);
  EXPECT_THAT(out_.str(), HasSubstr("lambda2,0.99"));
  EXPECT_THAT(out_.str(), HasSubstr("k,decay_norm"));
}

TEST_F(CliTest, BoundsOnPaperConfig) {
  ASSERT_EQ(Run({"bounds", "--config", Config("paper.json")}), 0) << err_.str();
  EXPECT_THAT(out_.str(), HasSubstr("max_admissible_theta"));
  EXPECT_THAT(out_.str(), HasSubstr("51.02"));
  EXPECT_EQ(Run({"bounds", "--config", Config("bad_prime.json")}), 3);
}

TEST_F(CliTest, PrivacyVerdicts) {
  EXPECT_EQ(Run({"privacy", "--topology", "ring", "--n", "4", "--adversary",
                 "1"}),
            0)
      << err_.str();
  const auto ring = nlohmann::json::parse(out_.str());
  EXPECT_EQ(ring["perfect_secrecy"], true);

  EXPECT_EQ(Run({"privacy", "--topology", "star", "--n", "4", "--adversary",
                 "1"}),
            4);
  const auto star = nlohmann::json::parse(out_.str());
  EXPECT_EQ(star["perfect_secrecy"], false);
  EXPECT_THAT(err_.str(), HasSubstr("2"));

  EXPECT_EQ(Run({"privacy", "--config", Config("ring_star_privacy.json"),
                 "--adversary", "1"}),
            4);
  EXPECT_EQ(nlohmann::json::parse(out_.str())["earliest_failing_round"], 2);
  EXPECT_EQ(Run({"privacy", "--topology", "ring", "--n", "4", "--adversary",
                 "1,2,3,4"}),
            2);
}

TEST_F(CliTest, PrivacyFromTranscriptFile) {
  ASSERT_EQ(Run({"simulate", "--config", Config("ring_star_privacy.json"),
                 "--out", out_dir_.string()}),
            0);
  EXPECT_EQ(Run({"privacy", "--transcript",
                 (out_dir_ / "transcript.jsonl").string(), "--adversary",
                 "1"}),
            4);
  EXPECT_EQ(Run({"privacy", "--transcript",
                 (out_dir_ / "missing.jsonl").string(), "--adversary", "3"}),
            2);
}

TEST_F(CliTest, BenchTinySweep) {
  ASSERT_EQ(Run({"bench", "--n", "5", "--topology", "ring", "--dims", "2,4",
                 "--ks", "3,6", "--repeats", "1", "--out", out_dir_.string()}),
            0)
      << err_.str();
  EXPECT_TRUE(std::filesystem::exists(out_dir_ / "bench.csv"));
}

}  // namespace
}  // namespace ppdfl
