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

#ifndef PPDFL_PRIME_FIELD_H_
#define PPDFL_PRIME_FIELD_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace ppdfl {

// Moduli are capped so that the product of two residues fits in 64 bits.
inline constexpr uint64_t kMaxModulus = uint64_t{1} << 31;

// Deterministic Miller-Rabin; exact for every 64-bit input.
bool IsPrime(uint64_t n);

// Smallest prime strictly greater than `n`.
uint64_t NextPrime(uint64_t n);

// A public prime p < 2^31 defining GF(p).
class PrimeModulus {
 public:
  // Throws kModulusTooLarge for p >= 2^31 and kNotPrime for composite p.
  explicit PrimeModulus(uint64_t p);

  uint64_t value() const { return p_; }

  // Throws kBadParameters unless p > n (shareholder ids and learner counts
  // must stay distinct and nonzero modulo p).
  void RequireExceeds(uint64_t n) const;

  friend bool operator==(const PrimeModulus&, const PrimeModulus&) = default;

 private:
  uint64_t p_;
};

// A residue in [0, p). Arithmetic between elements of different moduli
// throws kModulusMismatch.
class FieldElement {
 public:
  FieldElement(uint64_t value, PrimeModulus modulus)
      : value_(value % modulus.value()), modulus_(modulus) {}

  // Euclidean remainder: the result is always in [0, p).
  static FieldElement FromSigned(int64_t value, PrimeModulus modulus);
  static FieldElement Zero(PrimeModulus modulus) { return {0, modulus}; }
  static FieldElement One(PrimeModulus modulus) { return {1, modulus}; }

  uint64_t value() const { return value_; }
  PrimeModulus modulus() const { return modulus_; }
  bool IsZero() const { return value_ == 0; }

  FieldElement& operator+=(const FieldElement& other);
  FieldElement& operator-=(const FieldElement& other);
  FieldElement& operator*=(const FieldElement& other);

  friend FieldElement operator+(FieldElement a, const FieldElement& b) {
    return a += b;
  }
  friend FieldElement operator-(FieldElement a, const FieldElement& b) {
    return a -= b;
  }
  friend FieldElement operator*(FieldElement a, const FieldElement& b) {
    return a *= b;
  }
  FieldElement operator-() const;

  friend bool operator==(const FieldElement&, const FieldElement&) = default;

  // Extended Euclid. Throws kZeroInverse for the zero element.
  FieldElement Inverse() const;
  FieldElement Pow(uint64_t exponent) const;

 private:
  void CheckSameModulus(const FieldElement& other) const;

  uint64_t value_;
  PrimeModulus modulus_;
};

std::ostream& operator<<(std::ostream& os, const FieldElement& e);

FieldElement ModInverse(const FieldElement& a);

// Dense row-major matrix over GF(p).
class GfpMatrix {
 public:
  GfpMatrix(std::size_t rows, std::size_t cols, PrimeModulus modulus);

  // Entries are mapped into [0, p) by Euclidean remainder.
  static GfpMatrix FromRows(const std::vector<std::vector<int64_t>>& rows,
                            PrimeModulus modulus);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  PrimeModulus modulus() const { return modulus_; }

  FieldElement At(std::size_t r, std::size_t c) const {
    return {entries_[r * cols_ + c], modulus_};
  }
  void Set(std::size_t r, std::size_t c, const FieldElement& value);
  uint64_t RawAt(std::size_t r, std::size_t c) const {
    return entries_[r * cols_ + c];
  }

  // Appends a row given as residues; throws kDimensionMismatch on length.
  void AppendRow(std::span<const uint64_t> row);
  std::vector<FieldElement> Row(std::size_t r) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  PrimeModulus modulus_;
  std::vector<uint64_t> entries_;
};

struct RowReduction {
  GfpMatrix reduced;  // reduced row-echelon form, zero rows last
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_columns;
};

// Gauss-Jordan elimination to reduced row-echelon form. The row space is
// preserved. Throws kBadParameters on an empty matrix.
RowReduction GfpRowReduce(const GfpMatrix& m);

// True iff `v` is a GF(p)-linear combination of the rows of `m`.
bool InRowSpace(const GfpMatrix& m, std::span<const FieldElement> v);

// Coefficients c with sum_r c[r] * row_r(m) == v, or nullopt when `v` lies
// outside the row space.
std::optional<std::vector<FieldElement>> SolveRowCombination(
    const GfpMatrix& m, std::span<const FieldElement> v);

}  // namespace ppdfl

#endif  // PPDFL_PRIME_FIELD_H_
