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

#include "ppdfl/prime_field.h"

#include <sstream>
#include <utility>

#include "ppdfl/error.h"

namespace ppdfl {
namespace {

uint64_t MulMod64(uint64_t a, uint64_t b, uint64_t m) {
  return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

uint64_t PowMod64(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = MulMod64(result, base, m);
    base = MulMod64(base, base, m);
    exp >>= 1;
  }
  return result;
}

}  // namespace

bool IsPrime(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t small : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % small == 0) return n == small;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // These twelve bases are sufficient for all n < 2^64.
  for (uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    uint64_t x = PowMod64(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = MulMod64(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

uint64_t NextPrime(uint64_t n) {
  uint64_t candidate = n + 1;
  while (!IsPrime(candidate)) ++candidate;
  return candidate;
}

PrimeModulus::PrimeModulus(uint64_t p) : p_(p) {
  if (p >= kMaxModulus) {
    std::ostringstream msg;
    msg << "modulus " << p << " is not below 2^31";
    throw Error(ErrorCode::kModulusTooLarge, msg.str());
  }
  if (!IsPrime(p)) {
    throw Error(ErrorCode::kNotPrime, std::to_string(p) + " is not prime");
  }
}

void PrimeModulus::RequireExceeds(uint64_t n) const {
  if (p_ <= n) {
    std::ostringstream msg;
    msg << "prime " << p_ << " must exceed " << n;
    throw Error(ErrorCode::kBadParameters, msg.str());
  }
}

FieldElement FieldElement::FromSigned(int64_t value, PrimeModulus modulus) {
  const auto p = static_cast<int64_t>(modulus.value());
  int64_t r = value % p;
  if (r < 0) r += p;
  return {static_cast<uint64_t>(r), modulus};
}

void FieldElement::CheckSameModulus(const FieldElement& other) const {
  if (!(modulus_ == other.modulus_)) {
    std::ostringstream msg;
    msg << "GF(" << modulus_.value() << ") vs GF(" << other.modulus_.value()
        << ")";
    throw Error(ErrorCode::kModulusMismatch, msg.str());
  }
}

FieldElement& FieldElement::operator+=(const FieldElement& other) {
  CheckSameModulus(other);
  value_ += other.value_;
  if (value_ >= modulus_.value()) value_ -= modulus_.value();
  return *this;
}

FieldElement& FieldElement::operator-=(const FieldElement& other) {
  CheckSameModulus(other);
  value_ = value_ >= other.value_ ? value_ - other.value_
                                  : value_ + modulus_.value() - other.value_;
  return *this;
}

FieldElement& FieldElement::operator*=(const FieldElement& other) {
  CheckSameModulus(other);
  value_ = value_ * other.value_ % modulus_.value();
  return *this;
}

FieldElement FieldElement::operator-() const {
  return {value_ == 0 ? 0 : modulus_.value() - value_, modulus_};
}

FieldElement FieldElement::Inverse() const {
  if (value_ == 0) {
    throw Error(ErrorCode::kZeroInverse,
                "zero has no inverse mod " + std::to_string(modulus_.value()));
  }
  int64_t old_r = static_cast<int64_t>(value_);
  int64_t r = static_cast<int64_t>(modulus_.value());
  int64_t old_s = 1;
  int64_t s = 0;
  while (r != 0) {
    const int64_t q = old_r / r;
    old_r = std::exchange(r, old_r - q * r);
    old_s = std::exchange(s, old_s - q * s);
  }
  // old_r == gcd == 1 since p is prime and value_ != 0.
  return FromSigned(old_s, modulus_);
}

FieldElement FieldElement::Pow(uint64_t exponent) const {
  return {PowMod64(value_, exponent, modulus_.value()), modulus_};
}

std::ostream& operator<<(std::ostream& os, const FieldElement& e) {
  return os << e.value() << " (mod " << e.modulus().value() << ")";
}

FieldElement ModInverse(const FieldElement& a) { return a.Inverse(); }

GfpMatrix::GfpMatrix(std::size_t rows, std::size_t cols, PrimeModulus modulus)
    : rows_(rows), cols_(cols), modulus_(modulus), entries_(rows * cols, 0) {}

GfpMatrix GfpMatrix::FromRows(const std::vector<std::vector<int64_t>>& rows,
                              PrimeModulus modulus) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  GfpMatrix m(0, cols, modulus);
  std::vector<uint64_t> buf(cols);
  for (const auto& row : rows) {
    if (row.size() != cols) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged row list");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      buf[c] = FieldElement::FromSigned(row[c], modulus).value();
    }
    m.AppendRow(buf);
  }
  return m;
}

void GfpMatrix::Set(std::size_t r, std::size_t c, const FieldElement& value) {
  if (!(value.modulus() == modulus_)) {
    throw Error(ErrorCode::kModulusMismatch, "matrix entry modulus");
  }
  entries_[r * cols_ + c] = value.value();
}

void GfpMatrix::AppendRow(std::span<const uint64_t> row) {
  if (row.size() != cols_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "row length " + std::to_string(row.size()) + " vs " +
                    std::to_string(cols_) + " columns");
  }
  for (uint64_t v : row) entries_.push_back(v % modulus_.value());
  ++rows_;
}

std::vector<FieldElement> GfpMatrix::Row(std::size_t r) const {
  std::vector<FieldElement> out;
  out.reserve(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out.push_back(At(r, c));
  return out;
}

namespace {

// In-place Gauss-Jordan over a raw row-major buffer. Only the first
// `pivot_cols` columns are eligible as pivots; trailing columns ride along
// (used for tracking row combinations).
std::vector<std::size_t> ReduceInPlace(std::vector<uint64_t>& a,
                                       std::size_t rows, std::size_t cols,
                                       std::size_t pivot_cols, uint64_t p) {
  std::vector<std::size_t> pivots;
  std::size_t lead_row = 0;
  const PrimeModulus mod(p);
  for (std::size_t c = 0; c < pivot_cols && lead_row < rows; ++c) {
    std::size_t sel = lead_row;
    while (sel < rows && a[sel * cols + c] == 0) ++sel;
    if (sel == rows) continue;
    if (sel != lead_row) {
      for (std::size_t k = 0; k < cols; ++k) {
        std::swap(a[sel * cols + k], a[lead_row * cols + k]);
      }
    }
    uint64_t* lead = &a[lead_row * cols];
    const uint64_t inv = FieldElement(lead[c], mod).Inverse().value();
    for (std::size_t k = 0; k < cols; ++k) lead[k] = lead[k] * inv % p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == lead_row) continue;
      uint64_t* row = &a[r * cols];
      const uint64_t f = row[c];
      if (f == 0) continue;
      for (std::size_t k = 0; k < cols; ++k) {
        row[k] = (row[k] + (p - f) * lead[k]) % p;
      }
    }
    pivots.push_back(c);
    ++lead_row;
  }
  return pivots;
}

}  // namespace

RowReduction GfpRowReduce(const GfpMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(ErrorCode::kBadParameters, "row reduction of an empty matrix");
  }
  std::vector<uint64_t> buf(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      buf[r * m.cols() + c] = m.RawAt(r, c);
    }
  }
  const uint64_t p = m.modulus().value();
  auto pivots = ReduceInPlace(buf, m.rows(), m.cols(), m.cols(), p);
  GfpMatrix reduced(0, m.cols(), m.modulus());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    reduced.AppendRow(std::span<const uint64_t>(&buf[r * m.cols()], m.cols()));
  }
  const std::size_t rank = pivots.size();
  return {std::move(reduced), rank, std::move(pivots)};
}

std::optional<std::vector<FieldElement>> SolveRowCombination(
    const GfpMatrix& m, std::span<const FieldElement> v) {
  if (v.size() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "vector length " + std::to_string(v.size()) + " vs " +
                    std::to_string(m.cols()) + " columns");
  }
  const PrimeModulus mod = m.modulus();
  const uint64_t p = mod.value();
  for (const auto& e : v) {
    if (!(e.modulus() == mod)) {
      throw Error(ErrorCode::kModulusMismatch, "membership vector modulus");
    }
  }
  const std::size_t n = m.rows();
  const std::size_t width = m.cols() + n;
  // [M | I]: after reduction the right block records which combination of
  // the original rows produced each reduced row.
  std::vector<uint64_t> buf(n * width, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      buf[r * width + c] = m.RawAt(r, c);
    }
    buf[r * width + m.cols() + r] = 1;
  }
  const auto pivots = ReduceInPlace(buf, n, width, m.cols(), p);

  std::vector<uint64_t> residual(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) residual[c] = v[c].value();
  std::vector<uint64_t> coeffs(n, 0);
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    const uint64_t f = residual[pivots[i]];
    if (f == 0) continue;
    const uint64_t* row = &buf[i * width];
    for (std::size_t c = 0; c < m.cols(); ++c) {
      residual[c] = (residual[c] + (p - f) * row[c]) % p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      coeffs[r] = (coeffs[r] + f * row[m.cols() + r]) % p;
    }
  }
  for (uint64_t x : residual) {
    if (x != 0) return std::nullopt;
  }
  std::vector<FieldElement> out;
  out.reserve(n);
  for (uint64_t c : coeffs) out.emplace_back(c, mod);
  return out;
}

bool InRowSpace(const GfpMatrix& m, std::span<const FieldElement> v) {
  return SolveRowCombination(m, v).has_value();
}

}  // namespace ppdfl
