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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ppdfl/error.h"
#include "ppdfl/rng.h"
#include "ppdfl/topology_io.h"

namespace ppdfl {
namespace {

using nlohmann::json;

[[noreturn]] void ConfigFail(const std::string& message) {
  throw Error(ErrorCode::kConfig, message);
}

const json& Require(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) ConfigFail(std::string("missing field '") + key + "'");
  return *it;
}

uint64_t AsUnsigned(const json& v, const char* key) {
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<int64_t>() < 0)) {
    ConfigFail(std::string("field '") + key +
               "' must be a non-negative integer");
  }
  return v.get<uint64_t>();
}

double AsNumber(const json& v, const char* key) {
  if (!v.is_number()) {
    ConfigFail(std::string("field '") + key + "' must be a number");
  }
  return v.get<double>();
}

std::vector<RoundTopology> LoadScheduleFile(const std::filesystem::path& path,
                                            std::size_t n, std::size_t rounds) {
  std::ifstream in(path);
  if (!in) ConfigFail("cannot open schedule file " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".txt" || ext == ".edges") {
    // A single edge list reused for every round.
    RoundTopology g = ReadEdgeList(in, n);
    return std::vector<RoundTopology>(std::max<std::size_t>(rounds, 1), g);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    ConfigFail("schedule file " + path.string() + ": " + e.what());
  }
  return ScheduleFromJson(doc, n);
}

void ParseSchedule(const json& v, const std::filesystem::path& base_dir,
                   ProtocolConfig& cfg) {
  if (v.is_object()) {
    if (v.contains("generator")) {
      ParseSchedule(v.at("generator"), base_dir, cfg);
      return;
    }
    if (v.contains("file")) {
      ParseSchedule(v.at("file"), base_dir, cfg);
      return;
    }
    ConfigFail("schedule object needs 'generator' or 'file'");
  }
  if (v.is_array()) {
    auto rounds = ScheduleFromJson(v, cfg.n_learners);
    cfg.schedule_json = ScheduleToJson(rounds);
    cfg.schedule = TopologySchedule::Explicit(std::move(rounds));
    return;
  }
  if (!v.is_string()) ConfigFail("schedule must be a string, array or object");
  const auto text = v.get<std::string>();
  std::optional<TopologySpec> spec;
  try {
    spec = TopologySpec::Parse(text);
  } catch (const Error&) {
    if (text.rfind("random:", 0) == 0) throw;
  }
  if (spec) {
    cfg.schedule = MakeGeneratedSchedule(*spec, cfg.n_learners, cfg.seed);
    cfg.schedule_json = spec->ToString();
    return;
  }
  std::filesystem::path path(text);
  if (path.is_relative()) path = base_dir / path;
  auto rounds = LoadScheduleFile(path, cfg.n_learners, cfg.rounds);
  cfg.schedule_json = ScheduleToJson(rounds);
  cfg.schedule = TopologySchedule::Explicit(std::move(rounds));
}

}  // namespace

TopologySchedule MakeGeneratedSchedule(const TopologySpec& spec,
                                       std::size_t n_learners, uint64_t seed) {
  return TopologySchedule::Generated(
      spec, n_learners,
      DeriveSeed(seed, {static_cast<uint64_t>(StreamTag::kTopology)}));
}

ProtocolConfig ParseConfig(const json& doc,
                           const std::filesystem::path& base_dir) {
  if (!doc.is_object()) ConfigFail("config must be a JSON object");
  ProtocolConfig cfg;
  try {
    cfg.n_learners = AsUnsigned(Require(doc, "n_learners"), "n_learners");
    cfg.model_dim = AsUnsigned(Require(doc, "model_dim"), "model_dim");
    cfg.sigma = static_cast<int>(AsUnsigned(Require(doc, "sigma"), "sigma"));
    cfg.prime = AsUnsigned(Require(doc, "prime"), "prime");
    cfg.rounds = AsUnsigned(Require(doc, "rounds"), "rounds");
    cfg.theta_max = AsNumber(Require(doc, "theta_max"), "theta_max");
    cfg.seed = AsUnsigned(Require(doc, "seed"), "seed");

    const json& k = Require(doc, "k_policy");
    if (k.is_string() && k.get<std::string>() == "auto") {
      cfg.k_policy.mode = KPolicyMode::kAuto;
    } else if (k.is_string() && k.get<std::string>() == "global") {
      cfg.k_policy.mode = KPolicyMode::kGlobal;
    } else if (k.is_number_integer() && k.get<int64_t>() > 0) {
      cfg.k_policy.mode = KPolicyMode::kFixed;
      cfg.k_policy.fixed_k = k.get<std::size_t>();
    } else {
      ConfigFail("k_policy must be \"auto\", \"global\" or a positive integer");
    }

    const json& w = Require(doc, "weights");
    if (w.is_string() && w.get<std::string>() == "uniform") {
      cfg.weights.assign(cfg.n_learners,
                         cfg.n_learners == 0
                             ? 0.0
                             : 1.0 / static_cast<double>(cfg.n_learners));
    } else if (w.is_array()) {
      for (const auto& x : w) cfg.weights.push_back(AsNumber(x, "weights"));
    } else {
      ConfigFail("weights must be \"uniform\" or an array");
    }

    if (auto it = doc.find("initial_models"); it != doc.end()) {
      std::vector<std::vector<double>> models;
      for (const auto& row : *it) {
        std::vector<double> m;
        for (const auto& x : row) m.push_back(AsNumber(x, "initial_models"));
        models.push_back(std::move(m));
      }
      cfg.initial_models = std::move(models);
    }
    if (auto it = doc.find("trainer"); it != doc.end()) {
      const auto kind = it->value("kind", std::string("synthetic"));
      if (kind == "synthetic") {
        cfg.trainer.kind = TrainerKind::kSynthetic;
      } else if (kind == "constant") {
        cfg.trainer.kind = TrainerKind::kConstant;
      } else {
        ConfigFail("unknown trainer kind '" + kind + "'");
      }
      if (it->contains("noise")) cfg.trainer.noise = AsNumber(it->at("noise"), "noise");
    }
    if (auto it = doc.find("trajectory_coordinates"); it != doc.end()) {
      cfg.trajectory_coordinates.clear();
      for (const auto& x : *it) {
        cfg.trajectory_coordinates.push_back(
            AsUnsigned(x, "trajectory_coordinates"));
      }
    }
    if (auto it = doc.find("transcript"); it != doc.end()) {
      const auto level = it->get<std::string>();
      if (level == "full") {
        cfg.transcript = TranscriptLevel::kFull;
      } else if (level == "messages") {
        cfg.transcript = TranscriptLevel::kMessages;
      } else if (level == "none") {
        cfg.transcript = TranscriptLevel::kNone;
      } else {
        ConfigFail("transcript must be full, messages or none");
      }
    }
    ParseSchedule(Require(doc, "schedule"), base_dir, cfg);
  } catch (const json::exception& e) {
    ConfigFail(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    ConfigFail(e.what());
  }
  return cfg;
}

ProtocolConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) ConfigFail("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    ConfigFail(path.string() + ": " + e.what());
  }
  return ParseConfig(doc, path.parent_path());
}

void ValidateConfig(const ProtocolConfig& cfg) {
  if (cfg.n_learners < 2) ConfigFail("n_learners must be at least 2");
  if (cfg.model_dim == 0) ConfigFail("model_dim must be positive");
  if (cfg.rounds == 0) ConfigFail("rounds must be positive");
  if (!(cfg.theta_max > 0) || !std::isfinite(cfg.theta_max)) {
    ConfigFail("theta_max must be a positive number");
  }
  try {
    (void)cfg.precision();
    (void)cfg.modulus();
  } catch (const Error& e) {
    ConfigFail(e.what());
  }
  if (cfg.weights.size() != cfg.n_learners) {
    ConfigFail("expected " + std::to_string(cfg.n_learners) + " weights");
  }
  double total = 0;
  for (double w : cfg.weights) {
    if (!(w > 0)) ConfigFail("weights must be positive");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "weights sum to " << total
        << ", expected 1";
    ConfigFail(msg.str());
  }
  if (cfg.initial_models) {
    if (cfg.initial_models->size() != cfg.n_learners) {
      ConfigFail("initial_models needs one row per learner");
    }
    for (const auto& m : *cfg.initial_models) {
      if (m.size() != cfg.model_dim) {
        ConfigFail("initial_models rows must have model_dim entries");
      }
    }
  }
  for (std::size_t l : cfg.trajectory_coordinates) {
    if (l >= cfg.model_dim) ConfigFail("trajectory coordinate out of range");
  }
  if (cfg.schedule.n_nodes() != cfg.n_learners) {
    ConfigFail("schedule learner count differs from n_learners");
  }
  try {
    cfg.schedule.Validate(cfg.rounds);
  } catch (const Error& e) {
    ConfigFail(e.what());
  }

  const PBoundVerdict v =
      CheckPBound(cfg.prime, cfg.n_learners, cfg.precision(), cfg.theta_max);
  if (!v.ok) {
    std::ostringstream msg;
    msg << std::setprecision(12) << "prime bound violated: need p > max{N, 1 + "
        << "2*10^sigma*N*theta_max} = max{" << cfg.n_learners << ", "
        << v.required_magnitude_bound << "}, got p=" << cfg.prime
        << " (largest admissible |theta| is " << v.max_admissible_theta << ")";
    throw Error(ErrorCode::kBoundViolation, msg.str());
  }
}

json ConfigToJson(const ProtocolConfig& cfg) {
  json doc;
  doc["n_learners"] = cfg.n_learners;
  doc["model_dim"] = cfg.model_dim;
  doc["sigma"] = cfg.sigma;
  doc["prime"] = cfg.prime;
  doc["rounds"] = cfg.rounds;
  switch (cfg.k_policy.mode) {
    case KPolicyMode::kAuto: doc["k_policy"] = "auto"; break;
    case KPolicyMode::kGlobal: doc["k_policy"] = "global"; break;
    case KPolicyMode::kFixed: doc["k_policy"] = cfg.k_policy.fixed_k; break;
  }
  doc["weights"] = cfg.weights;
  doc["theta_max"] = cfg.theta_max;
  doc["seed"] = cfg.seed;
  doc["schedule"] = cfg.schedule_json;
  if (cfg.initial_models) doc["initial_models"] = *cfg.initial_models;
  doc["trainer"] = {
      {"kind", cfg.trainer.kind == TrainerKind::kSynthetic ? "synthetic"
                                                           : "constant"},
      {"noise", cfg.trainer.noise}};
  doc["trajectory_coordinates"] = cfg.trajectory_coordinates;
  switch (cfg.transcript) {
    case TranscriptLevel::kNone: doc["transcript"] = "none"; break;
    case TranscriptLevel::kMessages: doc["transcript"] = "messages"; break;
    case TranscriptLevel::kFull: doc["transcript"] = "full"; break;
  }
  return doc;
}

void OverrideSeed(ProtocolConfig& cfg, uint64_t seed) {
  cfg.seed = seed;
  if (const auto& gen = cfg.schedule.generator()) {
    cfg.schedule = MakeGeneratedSchedule(*gen, cfg.n_learners, seed);
  }
}

}  // namespace ppdfl
