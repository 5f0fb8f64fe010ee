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

#include "ppdfl/transcript.h"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "json.hpp"
#include "ppdfl/error.h"

namespace ppdfl {
namespace {

using nlohmann::json;

[[noreturn]] void Incomplete(const std::string& message) {
  throw Error(ErrorCode::kTranscriptIncomplete, message);
}

json RowPayload(const StateMatrix& m, Eigen::Index row, bool integral) {
  json payload = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (integral) {
      payload.push_back(static_cast<uint64_t>(m(row, c)));
    } else {
      payload.push_back(m(row, c));
    }
  }
  return payload;
}

}  // namespace

void RoundTranscript::ForEachStateMessage(
    const std::function<void(const StateMessage&)>& fn) const {
  for (std::size_t k = 0; k < states.size(); ++k) {
    const StateMatrix& m = states[k];
    for (NodeId i = 1; i <= topology.n_nodes(); ++i) {
      std::span<const double> row(m.data() + (i - 1) * m.cols(),
                                  static_cast<std::size_t>(m.cols()));
      for (NodeId j : topology.Neighbors(i)) fn({i, j, k, row});
    }
  }
}

std::vector<const ShareBundle*> RoundTranscript::BundlesFor(
    NodeId receiver) const {
  std::vector<const ShareBundle*> out;
  for (const auto& b : shares) {
    if (b.receiver == receiver) out.push_back(&b);
  }
  return out;
}

void WriteTranscriptJsonl(std::ostream& out, const Transcript& transcript) {
  out << json{{"phase", "header"},
              {"prime", transcript.prime},
              {"sigma", transcript.sigma},
              {"n_learners", transcript.n_learners},
              {"model_dim", transcript.model_dim},
              {"rounds", transcript.rounds.size()}}
             .dump()
      << '\n';
  for (const auto& r : transcript.rounds) {
    json edges = json::array();
    for (const auto& [a, b] : r.topology.edges()) edges.push_back({a, b});
    out << json{{"round", r.round}, {"phase", "topology"},
                {"n", r.topology.n_nodes()}, {"edges", edges},
                {"k", r.k}, {"lambda2", r.lambda2}}
               .dump()
        << '\n';
    for (const auto& b : r.shares) {
      out << json{{"round", r.round}, {"phase", "share"}, {"from", b.sender},
                  {"to", b.receiver}, {"payload", b.values}}
                 .dump()
          << '\n';
    }
    for (std::size_t k = 0; k < r.states.size(); ++k) {
      const StateMatrix& m = r.states[k];
      for (NodeId i = 1; i <= r.topology.n_nodes(); ++i) {
        const json payload = RowPayload(m, i - 1, k == 0);
        for (NodeId j : r.topology.Neighbors(i)) {
          out << json{{"round", r.round},
                      {"phase", k == 0 ? "initial_state" : "consensus"},
                      {"k", k}, {"from", i}, {"to", j}, {"payload", payload}}
                     .dump()
              << '\n';
        }
      }
    }
    for (std::size_t i = 0; i < r.decoded_units.size(); ++i) {
      out << json{{"round", r.round}, {"phase", "decoded"}, {"from", i + 1},
                  {"payload", r.decoded_units[i]}}
                 .dump()
          << '\n';
    }
    if (r.ground_truth) {
      for (std::size_t i = 0; i < r.ground_truth->size(); ++i) {
        out << json{{"round", r.round}, {"phase", "audit"}, {"from", i + 1},
                    {"payload", (*r.ground_truth)[i]}}
                   .dump()
            << '\n';
      }
    }
  }
}

Transcript ReadTranscriptJsonl(std::istream& in) {
  Transcript t;
  bool have_header = false;
  RoundTranscript* current = nullptr;
  std::vector<std::vector<bool>> seen;  // [k][learner] for the current round
  std::string line;
  std::size_t line_no = 0;

  auto finish_round = [&]() {
    if (current == nullptr) return;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      for (std::size_t i = 0; i < seen[k].size(); ++i) {
        if (!seen[k][i]) {
          Incomplete("round " + std::to_string(current->round) +
                     ": no state broadcast from learner " +
                     std::to_string(i + 1) + " at k=" + std::to_string(k));
        }
      }
    }
    if (!current->decoded_units.empty() &&
        current->decoded_units.size() != t.n_learners) {
      Incomplete("round " + std::to_string(current->round) +
                 ": decoded records missing");
    }
  };

  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json rec = json::parse(line);
      const std::string phase = rec.at("phase").get<std::string>();
      if (phase == "header") {
        t.prime = rec.at("prime").get<uint64_t>();
        t.sigma = rec.at("sigma").get<int>();
        t.n_learners = rec.at("n_learners").get<std::size_t>();
        t.model_dim = rec.at("model_dim").get<std::size_t>();
        have_header = true;
        continue;
      }
      if (!have_header) Incomplete("transcript header missing");
      const std::size_t round = rec.at("round").get<std::size_t>();
      if (phase == "topology") {
        finish_round();
        std::vector<Edge> edges;
        for (const auto& e : rec.at("edges")) {
          edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
        }
        RoundTranscript r;
        r.round = round;
        r.topology = RoundTopology(rec.at("n").get<std::size_t>(),
                                   std::move(edges), round);
        r.k = rec.at("k").get<std::size_t>();
        r.lambda2 = rec.at("lambda2").get<double>();
        t.rounds.push_back(std::move(r));
        current = &t.rounds.back();
        seen.clear();
        continue;
      }
      if (current == nullptr || current->round != round) {
        Incomplete("record for round " + std::to_string(round) +
                   " precedes its topology record");
      }
      const NodeId from = rec.at("from").get<NodeId>();
      if (from == 0 || from > t.n_learners) {
        Incomplete("learner id out of range on line " +
                   std::to_string(line_no));
      }
      if (phase == "share") {
        ShareBundle b;
        b.sender = from;
        b.receiver = rec.at("to").get<NodeId>();
        b.round = round;
        b.values = rec.at("payload").get<std::vector<uint64_t>>();
        current->shares.push_back(std::move(b));
      } else if (phase == "initial_state" || phase == "consensus") {
        const std::size_t k = rec.at("k").get<std::size_t>();
        const auto payload = rec.at("payload").get<std::vector<double>>();
        if (payload.size() != t.model_dim) {
          Incomplete("payload length mismatch on line " +
                     std::to_string(line_no));
        }
        while (current->states.size() <= k) {
          current->states.emplace_back(StateMatrix::Zero(
              static_cast<Eigen::Index>(t.n_learners),
              static_cast<Eigen::Index>(t.model_dim)));
          seen.emplace_back(t.n_learners, false);
        }
        StateMatrix& m = current->states[k];
        for (std::size_t c = 0; c < payload.size(); ++c) {
          const auto col = static_cast<Eigen::Index>(c);
          if (seen[k][from - 1] && m(from - 1, col) != payload[c]) {
            Incomplete("learner " + std::to_string(from) +
                       " broadcast inconsistent states at k=" +
                       std::to_string(k));
          }
          m(from - 1, col) = payload[c];
        }
        seen[k][from - 1] = true;
      } else if (phase == "decoded") {
        current->decoded_units.resize(t.n_learners);
        current->decoded_units[from - 1] =
            rec.at("payload").get<std::vector<int64_t>>();
      } else if (phase == "audit") {
        if (!current->ground_truth) {
          current->ground_truth.emplace(t.n_learners);
        }
        (*current->ground_truth)[from - 1] =
            rec.at("payload").get<std::vector<uint64_t>>();
      } else {
        Incomplete("unknown phase '" + phase + "'");
      }
    }
  } catch (const json::exception& e) {
    Incomplete("line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!have_header) Incomplete("transcript header missing");
  finish_round();
  for (auto& r : t.rounds) {
    std::sort(r.shares.begin(), r.shares.end(),
              [](const ShareBundle& a, const ShareBundle& b) {
                return std::tie(a.sender, a.receiver) <
                       std::tie(b.sender, b.receiver);
              });
  }
  return t;
}

}  // namespace ppdfl
