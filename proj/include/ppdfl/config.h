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

#ifndef PPDFL_CONFIG_H_
#define PPDFL_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ppdfl/fixed_point.h"
#include "ppdfl/prime_field.h"
#include "ppdfl/topology.h"

namespace ppdfl {

enum class KPolicyMode {
  kAuto,    // per-round minimal K from that round's weight matrix
  kGlobal,  // one K for every round: the max over the whole schedule
  kFixed,   // K from configuration; any round violating the bound fails
};

struct KPolicy {
  KPolicyMode mode = KPolicyMode::kAuto;
  std::size_t fixed_k = 0;
};

enum class TrainerKind { kSynthetic, kConstant };

struct TrainerSpec {
  TrainerKind kind = TrainerKind::kSynthetic;
  // Half-width of the uniform perturbation; negative selects the default of
  // 5% of theta_max.
  double noise = -1;
};

enum class TranscriptLevel {
  kNone,
  kMessages,  // shares, initial states and decoded outputs
  kFull,      // additionally every consensus iteration message
};

struct ProtocolConfig {
  std::size_t n_learners = 0;
  std::size_t model_dim = 0;
  int sigma = 0;
  uint64_t prime = 0;
  std::size_t rounds = 0;
  KPolicy k_policy;
  std::vector<double> weights;
  double theta_max = 0;
  uint64_t seed = 0;
  TopologySchedule schedule;
  // Canonical description of the schedule: the generator spec string or the
  // explicit edge lists.
  nlohmann::json schedule_json;
  std::optional<std::vector<std::vector<double>>> initial_models;
  TrainerSpec trainer;
  std::vector<std::size_t> trajectory_coordinates{0};
  TranscriptLevel transcript = TranscriptLevel::kFull;

  PrimeModulus modulus() const { return PrimeModulus(prime); }
  Precision precision() const { return Precision(sigma); }
};

// Parses the JSON config document. Relative schedule paths resolve against
// `base_dir`. Structural problems throw kConfig; the numeric bound on p is
// checked separately by ValidateConfig.
ProtocolConfig ParseConfig(const nlohmann::json& doc,
                           const std::filesystem::path& base_dir = {});
ProtocolConfig LoadConfig(const std::filesystem::path& path);

// Structural checks (kConfig) followed by the prime bound
// p > max{N, 1 + 2 * 10^sigma * N * theta_max} (kBoundViolation).
void ValidateConfig(const ProtocolConfig& cfg);

// Fully resolved config as JSON (weights expanded, schedule inlined or as
// generator spec).
nlohmann::json ConfigToJson(const ProtocolConfig& cfg);

// Replaces the seed and, for generated schedules, reseeds the generator.
void OverrideSeed(ProtocolConfig& cfg, uint64_t seed);

// The default generated schedule seed is derived from the run seed.
TopologySchedule MakeGeneratedSchedule(const TopologySpec& spec,
                                       std::size_t n_learners, uint64_t seed);

}  // namespace ppdfl

#endif  // PPDFL_CONFIG_H_
