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

#ifndef PPDFL_TOPOLOGY_IO_H_
#define PPDFL_TOPOLOGY_IO_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "json.hpp"
#include "ppdfl/topology.h"

namespace ppdfl {

// Edge-list text: one "i j" pair per line, 1-based ids. Blank lines and
// '#' comments are ignored. Without `n_nodes` the largest id seen is used.
RoundTopology ReadEdgeList(std::istream& in,
                           std::optional<std::size_t> n_nodes = std::nullopt);
RoundTopology ReadEdgeListFile(const std::filesystem::path& path,
                               std::optional<std::size_t> n_nodes = std::nullopt);
void WriteEdgeList(std::ostream& out, const RoundTopology& g);

// Schedule JSON: an array indexed by round whose elements are edge lists,
// each an array of [i, j] pairs.
std::vector<RoundTopology> ScheduleFromJson(const nlohmann::json& doc,
                                            std::size_t n_nodes);
nlohmann::json ScheduleToJson(const std::vector<RoundTopology>& rounds);
nlohmann::json EdgesToJson(const RoundTopology& g);

}  // namespace ppdfl

#endif  // PPDFL_TOPOLOGY_IO_H_
