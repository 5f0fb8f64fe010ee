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

#include "ppdfl/fixed_point.h"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ppdfl/error.h"

namespace ppdfl {
namespace {

constexpr double kGuard = 1e-6;

}  // namespace

Precision::Precision(int sigma) : sigma_(sigma), scale_(1) {
  if (sigma < 0 || sigma > 9) {
    throw Error(ErrorCode::kBadParameters,
                "sigma must be in [0, 9], got " + std::to_string(sigma));
  }
  for (int i = 0; i < sigma; ++i) scale_ *= 10;
}

int64_t TruncateScaled(double x, const Precision& prec) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kOutOfRange, "non-finite model value");
  }
  const double y = x * static_cast<double>(prec.scale());
  if (std::fabs(y) >= 9.0e18) {
    throw Error(ErrorCode::kOutOfRange, "scaled value exceeds int64");
  }
  const double nearest = std::nearbyint(y);
  if (std::fabs(y - nearest) < kGuard) return static_cast<int64_t>(nearest);
  return static_cast<int64_t>(std::trunc(y));
}

EncodedValue EncodeFixed(double x, const Precision& prec, PrimeModulus p) {
  const int64_t units = TruncateScaled(x, prec);
  const auto half = static_cast<int64_t>((p.value() - 1) / 2);
  if (units > half || units < -half) {
    std::ostringstream msg;
    msg << "value " << x << " at sigma=" << prec.sigma()
        << " is outside the sign-decodable range of p=" << p.value();
    throw Error(ErrorCode::kOutOfRange, msg.str());
  }
  return {FieldElement::FromSigned(units, p)};
}

int64_t DecodeSignedUnits(const FieldElement& z) {
  const uint64_t p = z.modulus().value();
  if (z.value() <= (p - 1) / 2) return static_cast<int64_t>(z.value());
  return static_cast<int64_t>(z.value()) - static_cast<int64_t>(p);
}

double DecodeSigned(const EncodedValue& value, const Precision& prec) {
  return static_cast<double>(DecodeSignedUnits(value.z)) /
         static_cast<double>(prec.scale());
}

std::string FormatUnits(int64_t units, const Precision& prec) {
  std::ostringstream os;
  if (units < 0) os << '-';
  const uint64_t mag = units < 0 ? static_cast<uint64_t>(-(units + 1)) + 1
                                 : static_cast<uint64_t>(units);
  const auto scale = static_cast<uint64_t>(prec.scale());
  os << mag / scale;
  if (prec.sigma() > 0) {
    std::string frac = std::to_string(mag % scale);
    os << '.' << std::string(prec.sigma() - frac.size(), '0') << frac;
  }
  return os.str();
}

PBoundVerdict CheckPBound(uint64_t p, uint64_t n_learners,
                          const Precision& prec, double theta_max) {
  PBoundVerdict v;
  const double scale = static_cast<double>(prec.scale());
  const double n = static_cast<double>(n_learners);
  v.exceeds_learner_count = p > n_learners;
  v.required_magnitude_bound = 1.0 + 2.0 * scale * n * theta_max;
  v.exceeds_magnitude_bound =
      static_cast<double>(p) > v.required_magnitude_bound;
  v.max_admissible_theta =
      n_learners == 0 ? 0.0 : static_cast<double>(p - 1) / (2.0 * scale * n);
  v.ok = v.exceeds_learner_count && v.exceeds_magnitude_bound;
  return v;
}

}  // namespace ppdfl
