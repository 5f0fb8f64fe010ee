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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppdfl/bench.h"
#include "ppdfl/config.h"
#include "ppdfl/consensus.h"
#include "ppdfl/fixed_point.h"
#include "ppdfl/privacy.h"
#include "ppdfl/protocol.h"
#include "ppdfl/transcript.h"

namespace ppdfl {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string config;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::string topology;
  std::size_t n = 0;
  std::string adversary;
  std::size_t kmax = 20;
  std::string transcript;
  std::size_t rounds = 1;
  bool all_coordinates = false;
  std::string dims;
  std::string ks;
  int repeats = 3;
};

std::vector<std::size_t> ParseList(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item[0] == '-') {
      throw Error(ErrorCode::kBadParameters, "bad list entry '" + item + "'");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::ofstream OpenOutput(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
  return f;
}

fs::path PrepareOutDir(const std::string& dir) {
  if (dir.empty()) throw Error(ErrorCode::kConfig, "--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

ProtocolConfig LoadValidated(const Options& opt) {
  if (opt.config.empty()) throw Error(ErrorCode::kConfig, "--config is required");
  ProtocolConfig cfg = LoadConfig(opt.config);
  if (opt.seed) OverrideSeed(cfg, *opt.seed);
  ValidateConfig(cfg);
  return cfg;
}

json TimingsJson(const PhaseTimings& t) {
  return {{"weights", t.weights},
          {"shares", t.shares},
          {"initial_state", t.initial_state},
          {"consensus", t.consensus},
          {"reconstruct", t.reconstruct},
          {"total", t.total()}};
}

std::string Hex(uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

int CmdSimulate(const Options& opt, std::ostream& out, std::ostream& err) {
  const ProtocolConfig cfg = LoadValidated(opt);
  const fs::path dir = PrepareOutDir(opt.out_dir);
  const Precision prec = cfg.precision();
  const TrainingResult run = RunTraining(cfg);

  {
    auto f = OpenOutput(dir, "trajectories.csv");
    f << "round,iteration,learner_id,coordinate,value\n";
    for (const auto& r : run.rounds) WriteRoundTrajectoryCsv(f, r);
  }
  {
    auto f = OpenOutput(dir, "decoded.csv");
    f << "round,learner_id,coordinate,value\n";
    for (const auto& r : run.rounds) WriteDecodedCsv(f, r, prec);
  }
  std::optional<ReplayReport> replay;
  if (cfg.transcript != TranscriptLevel::kNone) {
    auto f = OpenOutput(dir, "transcript.jsonl");
    WriteTranscriptJsonl(f, run.transcript);
    replay = ReplayTranscript(run.transcript);
  }

  json rounds = json::array();
  for (const auto& r : run.rounds) {
    rounds.push_back(
        {{"round", r.round},
         {"k", r.k},
         {"lambda2", r.lambda2},
         {"max_abs_deviation", static_cast<double>(r.max_deviation_units) /
                                   static_cast<double>(prec.scale())},
         {"max_deviation_units", r.max_deviation_units},
         {"rounding_margin", r.rounding_margin},
         {"agreement", r.agreement},
         {"global_model", r.DecodedModel(1, prec)},
         {"wall_time", TimingsJson(r.timings)}});
  }
  const int64_t deviation = run.max_deviation_units();
  const bool agree = run.all_agree();
  const double margin = run.max_rounding_margin();
  const bool replay_ok = !replay || replay->matches;
  const bool ok = deviation == 0 && agree && margin < 0.5 && replay_ok;
  json summary{{"rounds", rounds},
               {"max_abs_deviation", static_cast<double>(deviation) /
                                         static_cast<double>(prec.scale())},
               {"max_deviation_units", deviation},
               {"max_rounding_margin", margin},
               {"all_agree", agree},
               {"replay_matches", replay ? json(replay->matches) : json(nullptr)},
               {"exact", ok},
               {"wall_time", TimingsJson(run.timings)}};
  OpenOutput(dir, "summary.json") << summary.dump(2) << '\n';

  json manifest{{"version", kVersion},
                {"config", ConfigToJson(cfg)},
                {"schedule_digest", Hex(ScheduleDigest(cfg.schedule, cfg.rounds))},
                {"seed", cfg.seed},
                {"wall_time", TimingsJson(run.timings)}};
  OpenOutput(dir, "manifest.json") << manifest.dump(2) << '\n';

  out << "rounds: " << run.rounds.size() << "\n";
  for (const auto& r : run.rounds) {
    out << "round " << r.round << ": K=" << r.k << " lambda2=" << r.lambda2
        << " deviation_units=" << r.max_deviation_units
        << " margin=" << r.rounding_margin << "\n";
  }
  out << "max deviation: " << FormatUnits(deviation, prec) << "\n";
  if (!ok) {
    err << "self-check failed: deviation_units=" << deviation
        << " agreement=" << agree << " margin=" << margin
        << " replay=" << replay_ok << "\n";
    if (replay) {
      for (const auto& m : replay->mismatches) err << "  " << m << "\n";
    }
    return kExitInternal;
  }
  return kExitOk;
}

int CmdSpectral(const Options& opt, std::ostream& out) {
  if (opt.topology.empty() || opt.n < 2) {
    throw Error(ErrorCode::kConfig, "spectral needs --topology and --n >= 2");
  }
  const TopologySpec spec = TopologySpec::Parse(opt.topology);
  const RoundTopology g = GenerateTopology(spec, opt.n, opt.seed.value_or(1));
  const WeightMatrix a = MetropolisHastingsWeights(g);
  const double lambda2 = SecondLargestEigenvalue(a);
  const auto table = DecayTable(a, opt.kmax);
  std::ostringstream csv;
  csv << std::setprecision(12) << "lambda2," << lambda2 << "\nk,decay_norm\n";
  for (std::size_t k = 0; k < table.size(); ++k) {
    csv << k << ',' << table[k] << '\n';
  }
  out << csv.str();
  if (!opt.out_dir.empty()) {
    OpenOutput(PrepareOutDir(opt.out_dir), "spectral.csv") << csv.str();
  }
  return kExitOk;
}

int CmdBounds(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.config.empty()) throw Error(ErrorCode::kConfig, "--config is required");
  ProtocolConfig cfg = LoadConfig(opt.config);
  if (opt.seed) OverrideSeed(cfg, *opt.seed);
  bool pass = true;
  try {
    ValidateConfig(cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBoundViolation) throw;
  }
  const Precision prec = cfg.precision();
  const PBoundVerdict v =
      CheckPBound(cfg.prime, cfg.n_learners, prec, cfg.theta_max);
  out << std::setprecision(10);
  out << "p_bound: " << (v.ok ? "PASS" : "FAIL") << " p=" << cfg.prime
      << " N=" << cfg.n_learners << " 1+2*10^sigma*N*theta_max="
      << v.required_magnitude_bound << "\n";
  out << "max_admissible_theta: " << v.max_admissible_theta << "\n";
  if (!v.ok) {
    pass = false;
    if (!v.exceeds_learner_count) {
      err << "violated: p > N (p=" << cfg.prime << ", N=" << cfg.n_learners
          << ")\n";
    }
    if (!v.exceeds_magnitude_bound) {
      err << "violated: p > 1 + 2*10^sigma*N*theta_max (theta_max="
          << cfg.theta_max << " exceeds the admissible "
          << v.max_admissible_theta << ")\n";
    }
  }

  std::vector<std::pair<std::string, RoundTopology>> graphs;
  if (!opt.topology.empty()) {
    const TopologySpec spec = TopologySpec::Parse(opt.topology);
    graphs.emplace_back(spec.ToString(),
                        GenerateTopology(spec, cfg.n_learners,
                                         opt.seed.value_or(cfg.seed)));
  } else {
    for (std::size_t t = 1; t <= cfg.rounds; ++t) {
      graphs.emplace_back("round " + std::to_string(t), cfg.schedule.ForRound(t));
    }
  }
  out << "topology,lambda2,k_min,k_used,status\n";
  const PrimeModulus p(IsPrime(cfg.prime) ? cfg.prime : NextPrime(cfg.prime));
  for (const auto& [name, g] : graphs) {
    const WeightMatrix a = MetropolisHastingsWeights(g);
    const double lambda2 = SecondLargestEigenvalue(a);
    std::string k_min = "none";
    std::size_t k_used = 0;
    bool ok = true;
    try {
      const std::size_t k = MinIterations(a, p, a.size());
      k_min = std::to_string(k);
      k_used = cfg.k_policy.mode == KPolicyMode::kFixed ? cfg.k_policy.fixed_k
                                                        : k;
      ok = SatisfiesIterationBound(a, p.value(), k_used);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoFiniteK) throw;
      ok = false;
    }
    out << name << ',' << lambda2 << ',' << k_min << ',' << k_used << ','
        << (ok ? "PASS" : "FAIL") << "\n";
    if (!ok) {
      pass = false;
      err << name << ": violated: 2p*sqrt(N)*||N*A^K - 1 1^T|| < 1 at K="
          << k_used << "\n";
    }
  }
  return pass ? kExitOk : kExitBound;
}

int CmdPrivacy(const Options& opt, std::ostream& out, std::ostream& err) {
  Transcript transcript;
  if (!opt.transcript.empty()) {
    std::ifstream in(opt.transcript);
    if (!in) throw Error(ErrorCode::kConfig, "cannot open " + opt.transcript);
    transcript = ReadTranscriptJsonl(in);
  } else {
    ProtocolConfig cfg;
    if (!opt.config.empty()) {
      cfg = LoadConfig(opt.config);
      if (opt.seed) OverrideSeed(cfg, *opt.seed);
    } else {
      if (opt.topology.empty() || opt.n < 2) {
        throw Error(ErrorCode::kConfig,
                    "privacy needs --transcript, --config, or --topology "
                    "with --n");
      }
      cfg.n_learners = opt.n;
      cfg.model_dim = 1;
      cfg.sigma = 2;
      cfg.theta_max = 1;
      cfg.prime = NextPrime(std::max<uint64_t>(opt.n, 1 + 200 * opt.n));
      cfg.rounds = opt.rounds;
      cfg.weights.assign(opt.n, 1.0 / static_cast<double>(opt.n));
      cfg.seed = opt.seed.value_or(1);
      const TopologySpec spec = TopologySpec::Parse(opt.topology);
      cfg.schedule = MakeGeneratedSchedule(spec, opt.n, cfg.seed);
      cfg.schedule_json = spec.ToString();
    }
    if (cfg.transcript == TranscriptLevel::kNone) {
      cfg.transcript = TranscriptLevel::kMessages;
    }
    ValidateConfig(cfg);
    transcript = RunTraining(cfg).transcript;
  }
  const AdversarySet adv = AdversarySet::Parse(opt.adversary, transcript.n_learners);
  InferenceOptions options;
  if (opt.all_coordinates) options.coordinates.clear();
  const InferenceReport report = AdversaryInfer(transcript, adv, options);
  const std::string text = report.ToJson().dump(2);
  if (opt.out_dir.empty()) {
    out << text << '\n';
  } else {
    OpenOutput(PrepareOutDir(opt.out_dir), "privacy.json") << text << '\n';
  }
  for (const auto& r : report.rounds) {
    if (!r.ground_truth_consistent) {
      err << "round " << r.round << ": inferred values disagree with the "
          << "audit record\n";
      return kExitInternal;
    }
  }
  if (!report.verdict.perfect_secrecy) {
    err << "leakage in round " << *report.verdict.earliest_failing_round
        << "; surrounded sets:";
    for (const auto& s : report.verdict.witnesses) {
      err << " {";
      for (std::size_t k = 0; k < s.size(); ++k) err << (k ? "," : "") << s[k];
      err << "}";
    }
    err << "\n";
    return kExitLeakage;
  }
  return kExitOk;
}

int CmdBench(const Options& opt, std::ostream& out) {
  BenchOptions b;
  if (opt.n > 0) b.n_learners = opt.n;
  if (!opt.topology.empty()) b.topology = TopologySpec::Parse(opt.topology);
  if (opt.seed) b.seed = *opt.seed;
  if (!opt.dims.empty()) b.dims = ParseList(opt.dims);
  if (!opt.ks.empty()) b.ks = ParseList(opt.ks);
  b.repeats = opt.repeats;
  const BenchResult result = RunBench(b);
  std::ostringstream csv;
  WriteBenchCsv(csv, result);
  out << csv.str();
  if (!opt.out_dir.empty()) {
    OpenOutput(PrepareOutDir(opt.out_dir), "bench.csv") << csv.str();
  }
  return kExitOk;
}

}  // namespace

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kBadParameters:
    case ErrorCode::kNotPrime:
    case ErrorCode::kModulusTooLarge:
    case ErrorCode::kDisconnectedGraph:
    case ErrorCode::kBadWeights:
    case ErrorCode::kIo:
    case ErrorCode::kTranscriptIncomplete:
      return kExitConfig;
    case ErrorCode::kBoundViolation:
    case ErrorCode::kRangeViolation:
    case ErrorCode::kNoFiniteK:
      return kExitBound;
    default:
      return kExitInternal;
  }
}

uint64_t ScheduleDigest(const TopologySchedule& schedule, std::size_t rounds) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t t = 1; t <= rounds; ++t) {
    const RoundTopology g = schedule.ForRound(t);
    std::string line = std::to_string(t) + ":" + std::to_string(g.n_nodes());
    for (const auto& [a, b] : g.edges()) {
      line += " " + std::to_string(a) + "-" + std::to_string(b);
    }
    feed(line + "\n");
  }
  return h;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Privacy-preserving decentralized aggregation simulator",
               "ppdfl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options opt;
  uint64_t seed = 0;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Seed (overrides config)");
  };
  auto* simulate = app.add_subcommand("simulate", "Run the protocol");
  simulate->add_option("--config", opt.config, "Config JSON")->required();
  simulate->add_option("--out", opt.out_dir, "Output directory")->required();
  add_seed(simulate);

  auto* spectral = app.add_subcommand("spectral", "Second eigenvalue and decay");
  spectral->add_option("--topology", opt.topology,
                       "complete|star|line|ring|random:<avg_degree>")
      ->required();
  spectral->add_option("--n", opt.n, "Learner count")->required();
  spectral->add_option("--kmax", opt.kmax, "Largest k in the decay table");
  spectral->add_option("--out", opt.out_dir, "Output directory");
  add_seed(spectral);

  auto* bounds = app.add_subcommand("bounds", "Check the p and K bounds");
  bounds->add_option("--config", opt.config, "Config JSON")->required();
  bounds->add_option("--topology", opt.topology, "Check this topology instead");
  add_seed(bounds);

  auto* privacy = app.add_subcommand("privacy", "Secrecy verdict and inference");
  privacy->add_option("--transcript", opt.transcript, "Transcript JSONL");
  privacy->add_option("--config", opt.config, "Config JSON to simulate");
  privacy->add_option("--topology", opt.topology, "Generated topology");
  privacy->add_option("--n", opt.n, "Learner count for --topology");
  privacy->add_option("--rounds", opt.rounds, "Rounds for --topology");
  privacy->add_option("--adversary", opt.adversary, "Comma-separated ids");
  privacy->add_flag("--all-coordinates", opt.all_coordinates,
                    "Analyze every coordinate");
  privacy->add_option("--out", opt.out_dir, "Output directory");
  add_seed(privacy);

  auto* bench = app.add_subcommand("bench", "Timing sweeps");
  bench->add_option("--n", opt.n, "Learner count");
  bench->add_option("--topology", opt.topology, "Fixed topology");
  bench->add_option("--dims", opt.dims, "Model dimensions, comma-separated");
  bench->add_option("--ks", opt.ks, "Iteration counts, comma-separated");
  bench->add_option("--repeats", opt.repeats, "Repeats per point");
  bench->add_option("--out", opt.out_dir, "Output directory");
  add_seed(bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed") > 0) opt.seed = seed;
  }

  try {
    if (simulate->parsed()) return CmdSimulate(opt, out, err);
    if (spectral->parsed()) return CmdSpectral(opt, out);
    if (bounds->parsed()) return CmdBounds(opt, out, err);
    if (privacy->parsed()) return CmdPrivacy(opt, out, err);
    if (bench->parsed()) return CmdBench(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace ppdfl
