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

#include "ppdfl/secret_sharing.h"

#include <algorithm>
#include <sstream>

#include "ppdfl/error.h"

namespace ppdfl {

ShareholderSet::ShareholderSet(std::vector<uint64_t> ids, PrimeModulus modulus)
    : ids_(std::move(ids)), modulus_(modulus) {
  if (ids_.empty()) {
    throw Error(ErrorCode::kBadShareholderSet, "empty shareholder set");
  }
  std::sort(ids_.begin(), ids_.end());
  if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
    throw Error(ErrorCode::kBadShareholderSet, "duplicate shareholder id");
  }
  if (ids_.front() == 0 || ids_.back() >= modulus_.value()) {
    std::ostringstream msg;
    msg << "shareholder ids must lie in [1, " << modulus_.value() << ")";
    throw Error(ErrorCode::kBadShareholderSet, msg.str());
  }
}

bool ShareholderSet::Contains(uint64_t id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

FieldElement LagrangeDelta(const ShareholderSet& c, uint64_t i) {
  if (!c.Contains(i)) {
    throw Error(ErrorCode::kNotMember,
                "id " + std::to_string(i) + " is not a shareholder");
  }
  const PrimeModulus mod = c.modulus();
  FieldElement num = FieldElement::One(mod);
  FieldElement den = FieldElement::One(mod);
  const FieldElement fi(i, mod);
  for (uint64_t j : c.ids()) {
    if (j == i) continue;
    const FieldElement fj(j, mod);
    num *= fj;
    den *= fj - fi;
  }
  return num * den.Inverse();
}

std::vector<FieldElement> LagrangeDeltas(const ShareholderSet& c) {
  std::vector<FieldElement> out;
  out.reserve(c.size());
  for (uint64_t id : c.ids()) out.push_back(LagrangeDelta(c, id));
  return out;
}

SharingPolynomial::SharingPolynomial(std::vector<FieldElement> coefficients)
    : coefficients_(std::move(coefficients)) {
  if (coefficients_.empty()) {
    throw Error(ErrorCode::kBadDegree, "polynomial without coefficients");
  }
}

FieldElement SharingPolynomial::Evaluate(uint64_t x) const {
  const FieldElement fx(x, secret().modulus());
  FieldElement acc = coefficients_.back();
  for (auto it = coefficients_.rbegin() + 1; it != coefficients_.rend(); ++it) {
    acc = acc * fx + *it;
  }
  return acc;
}

SharingPolynomial SampleSharingPolynomial(const FieldElement& secret, int tau,
                                          DeterministicRng& rng) {
  if (tau < 0) {
    throw Error(ErrorCode::kBadDegree, "negative polynomial degree");
  }
  const PrimeModulus mod = secret.modulus();
  const uint64_t p = mod.value();
  std::vector<FieldElement> coeffs;
  coeffs.reserve(tau + 1);
  coeffs.push_back(secret);
  for (int m = 1; m < tau; ++m) coeffs.emplace_back(rng.UniformBelow(p), mod);
  if (tau >= 1) coeffs.emplace_back(rng.UniformInRange(1, p - 1), mod);
  return SharingPolynomial(std::move(coeffs));
}

RawShares EvaluateShares(const SharingPolynomial& poly,
                         const ShareholderSet& c) {
  RawShares out;
  for (uint64_t id : c.ids()) out.emplace(id, RawShare{id, poly.Evaluate(id)});
  return out;
}

RawShares GenerateShares(const FieldElement& secret, int tau,
                         const ShareholderSet& c, DeterministicRng& rng) {
  const int holders = static_cast<int>(c.size());
  const bool ok = tau >= 0 && tau < holders;
  if (!ok) {
    std::ostringstream msg;
    msg << "degree " << tau << " invalid for " << holders << " shareholders";
    throw Error(ErrorCode::kBadDegree, msg.str());
  }
  return EvaluateShares(SampleSharingPolynomial(secret, tau, rng), c);
}

WeightedShares WeightShares(const RawShares& raw, const ShareholderSet& c) {
  bool match = raw.size() == c.size();
  if (match) {
    auto it = raw.begin();
    for (uint64_t id : c.ids()) {
      if ((it++)->first != id) {
        match = false;
        break;
      }
    }
  }
  if (!match) {
    throw Error(ErrorCode::kKeySetMismatch,
                "raw share ids differ from the shareholder set");
  }
  WeightedShares out;
  for (const auto& [id, share] : raw) {
    out.emplace(id, WeightedShare{id, share.value * LagrangeDelta(c, id)});
  }
  return out;
}

FieldElement Reconstruct(const RawShares& shares, int tau) {
  if (tau < 0 || shares.size() < static_cast<std::size_t>(tau) + 1) {
    std::ostringstream msg;
    msg << shares.size() << " shares cannot reconstruct a degree-" << tau
        << " polynomial";
    throw Error(ErrorCode::kTooFewShares, msg.str());
  }
  const PrimeModulus mod = shares.begin()->second.value.modulus();
  std::vector<uint64_t> ids;
  ids.reserve(shares.size());
  for (const auto& [id, share] : shares) ids.push_back(id);
  const ShareholderSet subset(std::move(ids), mod);
  FieldElement acc = FieldElement::Zero(mod);
  for (const auto& [id, share] : shares) {
    acc += share.value * LagrangeDelta(subset, id);
  }
  return acc;
}

FieldElement Reconstruct(const RawShares& shares, const ShareholderSet& c,
                         int tau) {
  for (const auto& [id, share] : shares) {
    if (!c.Contains(id)) {
      throw Error(ErrorCode::kNotMember,
                  "share holder " + std::to_string(id) +
                      " is outside the generating set");
    }
  }
  return Reconstruct(shares, tau);
}

}  // namespace ppdfl
