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

#ifndef PPDFL_FIXED_POINT_H_
#define PPDFL_FIXED_POINT_H_

#include <cstdint>
#include <string>

#include "ppdfl/prime_field.h"

namespace ppdfl {

// Number of decimal fraction digits retained; scale = 10^sigma.
class Precision {
 public:
  // Throws kBadParameters for sigma > 9 (scale must stay well inside int64
  // once multiplied by model magnitudes and learner counts).
  explicit Precision(int sigma);

  int sigma() const { return sigma_; }
  int64_t scale() const { return scale_; }

 private:
  int sigma_;
  int64_t scale_;
};

// trunc(scale * x) toward zero, with a guard against binary representation
// error: products within 1e-6 of an integer snap to that integer, so a
// sigma-digit decimal such as 1.23 encodes as exactly 123.
int64_t TruncateScaled(double x, const Precision& prec);

struct EncodedValue {
  FieldElement z;
};

// z = trunc(scale * x) mod p. Throws kOutOfRange when the truncated integer
// falls outside [-(p-1)/2, (p-1)/2], where the sign could not be recovered.
EncodedValue EncodeFixed(double x, const Precision& prec, PrimeModulus p);

// Maps a residue to the signed integer it represents: z when
// z <= (p-1)/2, else z - p.
int64_t DecodeSignedUnits(const FieldElement& z);

// DecodeSignedUnits(z) / scale.
double DecodeSigned(const EncodedValue& value, const Precision& prec);

// Renders a signed count of 10^-sigma units as a decimal string with exactly
// sigma fraction digits ("-0.50", "5102.15").
std::string FormatUnits(int64_t units, const Precision& prec);

struct PBoundVerdict {
  bool ok = false;
  bool exceeds_learner_count = false;  // p > N
  bool exceeds_magnitude_bound = false;  // p > 1 + 2 * scale * N * theta_max
  double required_magnitude_bound = 0;   // 1 + 2 * scale * N * theta_max
  double max_admissible_theta = 0;       // (p - 1) / (2 * scale * N)
};

// Checks p > max{N, 1 + 2 * 10^sigma * N * theta_max}, the condition that
// keeps every aggregate sign-decodable.
PBoundVerdict CheckPBound(uint64_t p, uint64_t n_learners,
                          const Precision& prec, double theta_max);

}  // namespace ppdfl

#endif  // PPDFL_FIXED_POINT_H_
