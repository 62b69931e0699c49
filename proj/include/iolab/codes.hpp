// Copyright 2026 The iolab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Matrices with strong row independence: Vandermonde matrices over F_q and
// transposed binary BCH parity-check matrices over F_2.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iolab/field_matrix.hpp"

namespace iolab::codes {

// N x d matrix with row i = (1, a_i, a_i^2, ..., a_i^(d-1)), a_i = i for
// i = 1..N. Throws ConfigError if q <= N or d > N, FieldError if q is not
// prime.
FieldMatrix vandermonde_matrix(std::size_t n, std::size_t d, std::uint64_t q);

// Same construction from explicit nodes, which must be distinct mod q.
FieldMatrix vandermonde_from_nodes(std::span<const std::uint64_t> nodes,
                                   std::size_t d, std::uint64_t q);

// prod_{i<j} (a_j - a_i) mod q: the determinant of the square Vandermonde
// matrix on these nodes.
std::uint64_t vandermonde_determinant(std::span<const std::uint64_t> nodes,
                                      std::uint64_t q);

// GF(2^m) in the polynomial basis {1, x, ..., x^(m-1)} modulo a primitive
// polynomial, elements as bitmasks.
class BinaryExtField {
 public:
  // Uses the stored primitive polynomial for m in [2, 10]; throws
  // ConfigError otherwise.
  explicit BinaryExtField(std::size_t m);
  // Throws ConfigError unless `poly` has degree m and x has order 2^m - 1.
  BinaryExtField(std::size_t m, std::uint32_t poly);

  std::size_t degree() const { return m_; }
  std::uint32_t polynomial() const { return poly_; }
  std::uint32_t order() const { return order_; }  // 2^m - 1

  // alpha^k for the primitive element alpha = x, any k >= 0.
  std::uint32_t alpha_pow(std::uint64_t k) const { return exp_[k % order_]; }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const;

 private:
  void build();

  std::size_t m_ = 0;
  std::uint32_t poly_ = 0;
  std::uint32_t order_ = 0;
  std::vector<std::uint32_t> exp_;
  std::vector<std::uint32_t> log_;
};

// Standard primitive polynomial of degree m as a bitmask (bit i is the
// coefficient of x^i), m in [2, 10].
std::uint32_t primitive_polynomial(std::size_t m);

struct BchOptions {
  // Also expand the constraints c(alpha^j) = 0 for even j, which are
  // implied by the odd ones.
  bool include_even_powers = false;
};

// Parity-check matrix of the binary BCH code of length 2^m - 1 and designed
// distance s: constraint c(alpha^j) = 0 for each odd j in [1, s-1] expands
// into m binary rows, one per coordinate of alpha^(j*t) in the polynomial
// basis. Requires 1 <= s - 1 < 2^m - 1.
FieldMatrix bch_parity_check(std::size_t m, std::size_t s, BchOptions options = {});

struct BinaryIndependenceMatrix {
  FieldMatrix k;             // N x d over F_2
  std::size_t m = 0;         // 2^m - 1 >= N, minimal
  std::size_t s = 0;         // designed distance of the underlying code
  std::size_t independence;  // every this-many rows are independent
};

// K = H^T for the BCH parity check with the minimal m, truncated to the
// first N rows and zero-padded to d columns. s is the largest odd distance
// whose parity rows fit in d columns; the guaranteed independence is
// floor(2d / m) - 1. Throws ConfigError when that is below 1 or d > N.
BinaryIndependenceMatrix binary_independence_matrix(std::size_t n, std::size_t d);

inline constexpr std::size_t kMaxNullSpaceDim = 20;

// Minimum Hamming weight of a nonzero vector in the null space of binary H,
// or nullopt when the null space is trivial. Throws EnumerationCapError
// when the null space dimension exceeds kMaxNullSpaceDim.
std::optional<std::size_t> min_code_distance(const FieldMatrix& h);

}  // namespace iolab::codes
