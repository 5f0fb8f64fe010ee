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

#ifndef PPDFL_SECRET_SHARING_H_
#define PPDFL_SECRET_SHARING_H_

#include <cstdint>
#include <map>
#include <vector>

#include "ppdfl/prime_field.h"
#include "ppdfl/rng.h"

namespace ppdfl {

// Distinct nonzero evaluation points (learner ids), each below p. Ids are
// kept in ascending order.
class ShareholderSet {
 public:
  // Throws kBadShareholderSet on an empty, duplicated, zero or >= p id.
  ShareholderSet(std::vector<uint64_t> ids, PrimeModulus modulus);

  const std::vector<uint64_t>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool Contains(uint64_t id) const;
  PrimeModulus modulus() const { return modulus_; }

 private:
  std::vector<uint64_t> ids_;
  PrimeModulus modulus_;
};

struct RawShare {
  uint64_t holder_id;
  FieldElement value;
};

// A raw share already multiplied by its holder's Lagrange coefficient, so
// that summing the full set of weighted shares yields the secret.
struct WeightedShare {
  uint64_t holder_id;
  FieldElement value;
};

using RawShares = std::map<uint64_t, RawShare>;
using WeightedShares = std::map<uint64_t, WeightedShare>;

// prod_{j in C, j != i} j / (j - i) mod p; 1 for a singleton set.
// Throws kNotMember when i is not in C.
FieldElement LagrangeDelta(const ShareholderSet& c, uint64_t i);

// Deltas for every member, in the order of c.ids().
std::vector<FieldElement> LagrangeDeltas(const ShareholderSet& c);

// H(x) = secret + c_1 x + ... + c_tau x^tau over GF(p).
class SharingPolynomial {
 public:
  explicit SharingPolynomial(std::vector<FieldElement> coefficients);

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  const FieldElement& secret() const { return coefficients_.front(); }
  const std::vector<FieldElement>& coefficients() const {
    return coefficients_;
  }
  FieldElement Evaluate(uint64_t x) const;

 private:
  std::vector<FieldElement> coefficients_;
};

// Draws c_1..c_{tau-1} uniformly from [0, p) and c_tau from [1, p), in that
// order. tau = 0 yields the constant polynomial.
SharingPolynomial SampleSharingPolynomial(const FieldElement& secret, int tau,
                                          DeterministicRng& rng);
// Shamir share generation: one share H(j) per j in C. Requires
// 0 <= tau < |C|; throws kBadDegree otherwise.
RawShares GenerateShares(const FieldElement& secret, int tau,
                         const ShareholderSet& c, DeterministicRng& rng);

RawShares EvaluateShares(const SharingPolynomial& poly,
                         const ShareholderSet& c);

// Multiplies each raw share by LagrangeDelta(C, holder). Throws
// kKeySetMismatch unless raw's ids are exactly C.
WeightedShares WeightShares(const RawShares& raw, const ShareholderSet& c);

// Lagrange interpolation at zero over the ids present in `shares`. Throws
// kTooFewShares when fewer than tau + 1 shares are supplied.
FieldElement Reconstruct(const RawShares& shares, int tau);

// As above, additionally checking that every share holder belongs to `c`.
FieldElement Reconstruct(const RawShares& shares, const ShareholderSet& c,
                         int tau);

}  // namespace ppdfl

#endif  // PPDFL_SECRET_SHARING_H_
