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

#include "ppdfl/topology_io.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "ppdfl/error.h"

namespace ppdfl {

RoundTopology ReadEdgeList(std::istream& in,
                           std::optional<std::size_t> n_nodes) {
  std::vector<Edge> edges;
  std::size_t max_id = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    long long a = 0;
    long long b = 0;
    if (!(fields >> a)) continue;
    std::string rest;
    if (!(fields >> b) || (fields >> rest) || a <= 0 || b <= 0) {
      throw Error(ErrorCode::kBadParameters,
                  "malformed edge on line " + std::to_string(line_no));
    }
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
    max_id = std::max<std::size_t>(max_id, std::max(a, b));
  }
  return RoundTopology(n_nodes.value_or(max_id), std::move(edges));
}

RoundTopology ReadEdgeListFile(const std::filesystem::path& path,
                               std::optional<std::size_t> n_nodes) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return ReadEdgeList(in, n_nodes);
}

void WriteEdgeList(std::ostream& out, const RoundTopology& g) {
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

std::vector<RoundTopology> ScheduleFromJson(const nlohmann::json& doc,
                                            std::size_t n_nodes) {
  if (!doc.is_array()) {
    throw Error(ErrorCode::kConfig, "schedule must be a JSON array");
  }
  std::vector<RoundTopology> rounds;
  for (std::size_t t = 0; t < doc.size(); ++t) {
    const auto& list = doc[t];
    if (!list.is_array()) {
      throw Error(ErrorCode::kConfig,
                  "schedule round " + std::to_string(t + 1) +
                      " is not an edge list");
    }
    std::vector<Edge> edges;
    for (const auto& e : list) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
          !e[1].is_number_unsigned()) {
        throw Error(ErrorCode::kConfig,
                    "schedule round " + std::to_string(t + 1) +
                        " has a malformed edge");
      }
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    rounds.emplace_back(n_nodes, std::move(edges), t + 1);
  }
  return rounds;
}

nlohmann::json EdgesToJson(const RoundTopology& g) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [a, b] : g.edges()) list.push_back({a, b});
  return list;
}

nlohmann::json ScheduleToJson(const std::vector<RoundTopology>& rounds) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& g : rounds) doc.push_back(EdgesToJson(g));
  return doc;
}

}  // namespace ppdfl
