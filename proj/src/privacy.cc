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

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "ppdfl/error.h"
#include "ppdfl/fixed_point.h"
#include "ppdfl/prime_field.h"
#include "ppdfl/secret_sharing.h"

namespace ppdfl {
namespace {

using nlohmann::json;

constexpr std::size_t kNpos = std::numeric_limits<std::size_t>::max();

std::vector<NodeId> ClosedNeighborhood(const RoundTopology& g, NodeId i) {
  std::vector<NodeId> c = g.Neighbors(i);
  c.insert(std::lower_bound(c.begin(), c.end(), i), i);
  return c;
}

[[noreturn]] void Incomplete(std::size_t round, const std::string& what) {
  throw Error(ErrorCode::kTranscriptIncomplete,
              "round " + std::to_string(round) + ": " + what);
}

uint64_t AddMod(uint64_t a, uint64_t b, uint64_t p) { return (a + b) % p; }
uint64_t SubMod(uint64_t a, uint64_t b, uint64_t p) { return (a + p - b) % p; }
uint64_t MulMod(uint64_t a, uint64_t b, uint64_t p) { return a * b % p; }

const char* KindName(FunctionalKind k) {
  return k == FunctionalKind::kComponentSum ? "component_sum" : "individual";
}

// Inferable functionals of one round and coordinate.
RoundInference InferRound(const Transcript& t, const RoundTranscript& r,
                          const AdversarySet& adv, std::size_t l,
                          std::size_t max_unknowns) {
  const uint64_t p = t.prime;
  const PrimeModulus modulus(p);
  const RoundTopology& g = r.topology;
  const auto& benign = adv.benign();
  const std::size_t nb = benign.size();

  RoundInference out;
  out.round = r.round;
  out.coordinate = l;
  out.prime = p;
  out.decomposition = SurroundedComponents(g, adv);

  std::vector<std::size_t> coef_offset(nb);
  std::size_t nc = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    coef_offset[b] = nc;
    nc += g.Degree(benign[b]);
  }
  const std::size_t cols = nc + nb + 1;  // last column is the observed value
  if (nc + nb > max_unknowns) {
    out.skipped = true;
    return out;
  }
  if (r.shares.empty()) Incomplete(r.round, "share bundles not recorded");
  if (r.states.empty()) Incomplete(r.round, "initial states not recorded");
  if (r.decoded_units.empty()) Incomplete(r.round, "outputs not recorded");

  std::map<std::pair<NodeId, NodeId>, uint64_t> share;
  for (const auto& b : r.shares) {
    if (l >= b.values.size()) Incomplete(r.round, "short share bundle");
    share[{b.sender, b.receiver}] = b.values[l] % p;
  }
  auto lookup = [&](NodeId from, NodeId to) {
    auto it = share.find({from, to});
    if (it == share.end()) {
      Incomplete(r.round, "no bundle from " + std::to_string(from) + " to " +
                              std::to_string(to));
    }
    return it->second;
  };

  // delta[b][h]: Lagrange coefficient of holder h in sender b's set.
  std::vector<std::vector<NodeId>> closed(nb);
  std::vector<std::vector<uint64_t>> delta(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    closed[b] = ClosedNeighborhood(g, benign[b]);
    const ShareholderSet c(
        std::vector<uint64_t>(closed[b].begin(), closed[b].end()), modulus);
    for (const auto& d : LagrangeDeltas(c)) delta[b].push_back(d.value());
  }
  auto delta_of = [&](std::size_t b, NodeId holder) {
    const auto& c = closed[b];
    return delta[b][static_cast<std::size_t>(
        std::lower_bound(c.begin(), c.end(), holder) - c.begin())];
  };
  // Adds coefficient * (x_b + sum_m c_{b,m} x^m) to row.
  auto add_share_terms = [&](std::vector<uint64_t>& row, std::size_t b,
                             NodeId x, uint64_t coefficient) {
    row[nc + b] = AddMod(row[nc + b], coefficient, p);
    uint64_t power = 1;
    for (std::size_t m = 0; m < g.Degree(benign[b]); ++m) {
      power = MulMod(power, x, p);
      auto& cell = row[coef_offset[b] + m];
      cell = AddMod(cell, MulMod(coefficient, power, p), p);
    }
  };

  GfpMatrix system(0, cols, modulus);
  // Weighted shares received by adversaries from benign senders.
  for (std::size_t b = 0; b < nb; ++b) {
    for (NodeId h : closed[b]) {
      if (!adv.IsAdversarial(h)) continue;
      std::vector<uint64_t> row(cols, 0);
      add_share_terms(row, b, h, delta_of(b, h));
      row[cols - 1] = lookup(benign[b], h);
      system.AppendRow(row);
    }
  }
  // Masked initial states of benign learners, adversarial shares removed.
  for (std::size_t bi = 0; bi < nb; ++bi) {
    const NodeId i = benign[bi];
    std::vector<uint64_t> row(cols, 0);
    uint64_t known = 0;
    for (NodeId j : ClosedNeighborhood(g, i)) {
      if (adv.IsAdversarial(j)) {
        known = AddMod(known, lookup(j, i), p);
      } else {
        const std::size_t bj = adv.BenignIndex(j);
        add_share_terms(row, bj, i, delta_of(bj, i));
      }
    }
    const double s0 = r.states[0](i - 1, static_cast<Eigen::Index>(l));
    row[cols - 1] = SubMod(static_cast<uint64_t>(s0) % p, known, p);
    system.AppendRow(row);
  }
  // Public output minus the coalition's own secrets, which are the sums of
  // the weighted shares each adversary issued.
  {
    std::vector<uint64_t> row(cols, 0);
    for (std::size_t b = 0; b < nb; ++b) row[nc + b] = 1;
    uint64_t rhs =
        FieldElement::FromSigned(r.decoded_units.front().at(l), modulus).value();
    for (NodeId a : adv.adversaries()) {
      for (NodeId h : ClosedNeighborhood(g, a)) rhs = SubMod(rhs, lookup(a, h), p);
    }
    row[cols - 1] = rhs;
    system.AppendRow(row);
  }

  const RowReduction red = GfpRowReduce(system);
  for (std::size_t rr = 0; rr < red.rank; ++rr) {
    const std::size_t pivot = red.pivot_columns[rr];
    if (pivot == cols - 1) {
      throw Error(ErrorCode::kInternal,
                  "round " + std::to_string(r.round) +
                      ": observations are inconsistent");
    }
    if (pivot < nc) continue;
    std::vector<uint64_t> functional(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      functional[b] = red.reduced.RawAt(rr, nc + b);
    }
    out.basis.push_back(std::move(functional));
    out.basis_values.push_back(red.reduced.RawAt(rr, cols - 1));
  }

  const auto* truth = r.ground_truth ? &*r.ground_truth : nullptr;
  auto truth_sum = [&](const std::vector<NodeId>& members) {
    uint64_t v = 0;
    for (NodeId i : members) v = AddMod(v, (*truth)[i - 1].at(l) % p, p);
    return v;
  };
  for (const auto& set : out.decomposition.sets) {
    std::vector<uint64_t> f(nb, 0);
    for (NodeId i : set) f[adv.BenignIndex(i)] = 1;
    const auto value = out.Evaluate(f);
    out.component_sum_inferable.push_back(value.has_value());
    out.component_values.push_back(value);
    if (value && truth && *value != truth_sum(set)) {
      out.ground_truth_consistent = false;
    }
    if (!out.decomposition.is_single_set()) {
      LeakedFunctional leak{set.size() == 1 ? FunctionalKind::kIndividual
                                            : FunctionalKind::kComponentSum,
                            set, value, {}};
      if (value && truth) leak.matches_ground_truth = *value == truth_sum(set);
      out.leaked.push_back(std::move(leak));
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    std::vector<uint64_t> f(nb, 0);
    f[b] = 1;
    const auto value = out.Evaluate(f);
    out.individual_inferable.push_back(value.has_value());
    const std::vector<NodeId> members{benign[b]};
    if (value && truth && *value != truth_sum(members)) {
      out.ground_truth_consistent = false;
    }
    // With a single benign learner its secret is the public output itself.
    const bool is_component =
        std::any_of(out.decomposition.sets.begin(),
                    out.decomposition.sets.end(),
                    [&](const auto& s) { return s == members; });
    if (value && nb > 1 && !is_component) {
      LeakedFunctional leak{FunctionalKind::kIndividual, members, value, {}};
      if (truth) leak.matches_ground_truth = *value == truth_sum(members);
      out.leaked.push_back(std::move(leak));
    }
  }
  return out;
}

json SetsToJson(const std::vector<std::vector<NodeId>>& sets) {
  json out = json::array();
  for (const auto& s : sets) out.push_back(s);
  return out;
}

}  // namespace

AdversarySet::AdversarySet(std::vector<NodeId> adversaries,
                           std::size_t n_learners)
    : adversaries_(std::move(adversaries)), flags_(n_learners, false) {
  std::sort(adversaries_.begin(), adversaries_.end());
  for (std::size_t k = 0; k < adversaries_.size(); ++k) {
    const NodeId a = adversaries_[k];
    if (a == 0 || a > n_learners) {
      throw Error(ErrorCode::kBadParameters,
                  "adversary id " + std::to_string(a) + " outside [1, " +
                      std::to_string(n_learners) + "]");
    }
    if (k > 0 && adversaries_[k - 1] == a) {
      throw Error(ErrorCode::kBadParameters,
                  "duplicate adversary id " + std::to_string(a));
    }
    flags_[a - 1] = true;
  }
  for (NodeId i = 1; i <= n_learners; ++i) {
    if (!flags_[i - 1]) benign_.push_back(i);
  }
  if (benign_.empty()) {
    throw Error(ErrorCode::kBadParameters,
                "adversary set must leave at least one benign learner");
  }
}

AdversarySet AdversarySet::Parse(const std::string& text,
                                 std::size_t n_learners) {
  std::vector<NodeId> ids;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    const std::string token = item.substr(first, last - first + 1);
    std::size_t used = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || token.empty() || token[0] == '-') {
      throw Error(ErrorCode::kBadParameters,
                  "bad adversary id '" + token + "'");
    }
    ids.push_back(static_cast<NodeId>(value));
  }
  return AdversarySet(std::move(ids), n_learners);
}

std::size_t AdversarySet::BenignIndex(NodeId i) const {
  auto it = std::lower_bound(benign_.begin(), benign_.end(), i);
  if (it == benign_.end() || *it != i) return kNpos;
  return static_cast<std::size_t>(it - benign_.begin());
}

SurroundedDecomposition SurroundedComponents(const RoundTopology& g,
                                             const AdversarySet& adv) {
  if (g.n_nodes() != adv.n_learners()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "adversary set and topology disagree on N");
  }
  SurroundedDecomposition out;
  out.sets = InducedComponents(g, adv.benign());
  for (const auto& set : out.sets) {
    std::vector<bool> flags;
    for (NodeId i : set) {
      const auto& nb = g.Neighbors(i);
      flags.push_back(std::any_of(nb.begin(), nb.end(), [&](NodeId j) {
        return adv.IsAdversarial(j);
      }));
    }
    out.boundary.push_back(std::move(flags));
  }
  return out;
}

std::vector<std::vector<NodeId>> LiteralSurroundedSets(
    const RoundTopology& g, const AdversarySet& adv) {
  const auto& benign = adv.benign();
  if (benign.size() > 20) {
    throw Error(ErrorCode::kBadParameters,
                "literal enumeration limited to 20 benign learners");
  }
  std::vector<std::vector<NodeId>> out;
  const uint64_t limit = uint64_t{1} << benign.size();
  for (uint64_t mask = 1; mask < limit; ++mask) {
    std::vector<NodeId> subset;
    std::vector<bool> inside(g.n_nodes() + 1, false);
    for (std::size_t b = 0; b < benign.size(); ++b) {
      if (mask >> b & 1) {
        subset.push_back(benign[b]);
        inside[benign[b]] = true;
      }
    }
    bool closed = true;
    for (NodeId i : subset) {
      for (NodeId j : g.Neighbors(i)) {
        if (!adv.IsAdversarial(j) && !inside[j]) closed = false;
      }
    }
    if (closed && IsInducedConnected(g, subset)) out.push_back(subset);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SecrecyVerdict PerfectSecrecy(std::span<const RoundTopology> rounds,
                              const AdversarySet& adv) {
  SecrecyVerdict v;
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    SurroundedDecomposition d = SurroundedComponents(rounds[t], adv);
    if (!d.is_single_set() && v.perfect_secrecy) {
      v.perfect_secrecy = false;
      v.earliest_failing_round = t + 1;
      v.witnesses = d.sets;
    }
    v.per_round.push_back(std::move(d));
  }
  return v;
}

SecrecyVerdict PerfectSecrecy(const TopologySchedule& schedule,
                              std::size_t rounds, const AdversarySet& adv) {
  std::vector<RoundTopology> graphs;
  for (std::size_t t = 1; t <= rounds; ++t) {
    graphs.push_back(schedule.ForRound(t));
  }
  return PerfectSecrecy(graphs, adv);
}

bool RoundInference::InSpan(std::span<const uint64_t> functional) const {
  return Evaluate(functional).has_value();
}

std::optional<uint64_t> RoundInference::Evaluate(
    std::span<const uint64_t> functional) const {
  const uint64_t p = prime;
  std::vector<uint64_t> residual(functional.begin(), functional.end());
  for (auto& x : residual) x %= p;
  uint64_t value = 0;
  for (std::size_t r = 0; r < basis.size(); ++r) {
    const auto& row = basis[r];
    std::size_t pivot = 0;
    while (row[pivot] == 0) ++pivot;
    const uint64_t c = residual[pivot];  // pivot entries are 1 in RREF
    if (c == 0) continue;
    for (std::size_t b = 0; b < row.size(); ++b) {
      residual[b] = SubMod(residual[b], MulMod(c, row[b], p), p);
    }
    value = AddMod(value, MulMod(c, basis_values[r], p), p);
  }
  for (uint64_t x : residual) {
    if (x != 0) return std::nullopt;
  }
  return value;
}

bool RoundInference::SpanIsBenignSumOnly() const {
  if (basis.size() != 1) return false;
  const std::vector<uint64_t> ones(basis.front().size(), 1);
  return InSpan(ones);
}

json InferenceReport::ToJson() const {
  json out;
  out["perfect_secrecy"] = verdict.perfect_secrecy;
  out["earliest_failing_round"] =
      verdict.earliest_failing_round ? json(*verdict.earliest_failing_round)
                                     : json(nullptr);
  out["witnesses"] = SetsToJson(verdict.witnesses);
  json rounds_json = json::array();
  for (const auto& r : rounds) {
    json leaked = json::array();
    for (const auto& f : r.leaked) {
      json item{{"kind", KindName(f.kind)}, {"members", f.members}};
      if (f.value) {
        item["value"] = *f.value;
        item["decoded_value"] = FormatUnits(
            DecodeSignedUnits(FieldElement(*f.value, PrimeModulus(r.prime))),
            Precision(sigma));
      }
      if (f.matches_ground_truth) {
        item["matches_ground_truth"] = *f.matches_ground_truth;
      }
      leaked.push_back(std::move(item));
    }
    json entry{{"round", r.round},
               {"coordinate", r.coordinate},
               {"secrecy_verdict", r.decomposition.is_single_set()},
               {"surrounded_sets", SetsToJson(r.decomposition.sets)},
               {"leaked_functionals", leaked}};
    if (r.skipped) {
      entry["inference"] = "skipped";
    } else {
      entry["inferable_rank"] = r.basis.size();
      entry["ground_truth_consistent"] = r.ground_truth_consistent;
    }
    rounds_json.push_back(std::move(entry));
  }
  out["rounds"] = std::move(rounds_json);
  return out;
}

InferenceReport AdversaryInfer(const Transcript& transcript,
                               const AdversarySet& adv,
                               const InferenceOptions& options) {
  if (transcript.n_learners != adv.n_learners()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "adversary set and transcript disagree on N");
  }
  std::vector<std::size_t> coords = options.coordinates;
  if (coords.empty()) {
    for (std::size_t l = 0; l < transcript.model_dim; ++l) coords.push_back(l);
  }
  for (std::size_t l : coords) {
    if (l >= transcript.model_dim) {
      throw Error(ErrorCode::kBadParameters, "coordinate out of range");
    }
  }
  InferenceReport report;
  std::vector<RoundTopology> graphs;
  for (const auto& r : transcript.rounds) {
    graphs.push_back(r.topology);
    for (std::size_t l : coords) {
      report.rounds.push_back(
          InferRound(transcript, r, adv, l, options.max_unknowns));
    }
  }
  report.verdict = PerfectSecrecy(graphs, adv);
  report.sigma = transcript.sigma;
  return report;
}

bool SecrecyCrossCheck(const RoundTopology& g, const AdversarySet& adv) {
  const SurroundedDecomposition d = SurroundedComponents(g, adv);
  auto sets = d.sets;
  std::sort(sets.begin(), sets.end());
  if (LiteralSurroundedSets(g, adv) != sets) return false;
  const std::vector<RoundTopology> one{g};
  const bool verdict = PerfectSecrecy(one, adv).perfect_secrecy;
  return verdict == IsInducedConnected(g, adv.benign());
}

}  // namespace ppdfl
