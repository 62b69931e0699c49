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

#include "iolab/codes.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "iolab/errors.hpp"
#include "iolab/modular.hpp"

namespace iolab::codes {

FieldMatrix vandermonde_from_nodes(std::span<const std::uint64_t> nodes,
                                   std::size_t d, std::uint64_t q) {
  if (!is_prime(q)) throw FieldError("modulus " + std::to_string(q) + " is not prime");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i] % q == nodes[j] % q) {
        throw ConfigError("Vandermonde nodes " + std::to_string(i) + " and " +
                          std::to_string(j) + " coincide mod q");
      }
    }
  }
  FieldMatrix m(nodes.size(), d, q);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::uint64_t p = 1 % q;
    for (std::size_t c = 0; c < d; ++c) {
      m.set(i, c, p);
      p = mul_mod(p, nodes[i] % q, q);
    }
  }
  return m;
}

FieldMatrix vandermonde_matrix(std::size_t n, std::size_t d, std::uint64_t q) {
  if (!is_prime(q)) throw FieldError("modulus " + std::to_string(q) + " is not prime");
  if (q <= n) {
    throw ConfigError("Vandermonde needs q > N (q=" + std::to_string(q) +
                      ", N=" + std::to_string(n) + ")");
  }
  if (d == 0 || d > n) throw ConfigError("Vandermonde needs 1 <= d <= N");
  std::vector<std::uint64_t> nodes(n);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = i + 1;
  return vandermonde_from_nodes(nodes, d, q);
}

std::uint64_t vandermonde_determinant(std::span<const std::uint64_t> nodes,
                                      std::uint64_t q) {
  std::uint64_t det = 1 % q;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      det = mul_mod(det, sub_mod(nodes[j] % q, nodes[i] % q, q), q);
    }
  }
  return det;
}

std::uint32_t primitive_polynomial(std::size_t m) {
  switch (m) {
    case 2: return 0x7;     // x^2 + x + 1
    case 3: return 0xB;     // x^3 + x + 1
    case 4: return 0x13;    // x^4 + x + 1
    case 5: return 0x25;    // x^5 + x^2 + 1
    case 6: return 0x43;    // x^6 + x + 1
    case 7: return 0x89;    // x^7 + x^3 + 1
    case 8: return 0x11D;   // x^8 + x^4 + x^3 + x^2 + 1
    case 9: return 0x211;   // x^9 + x^4 + 1
    case 10: return 0x409;  // x^10 + x^3 + 1
    default:
      throw ConfigError("no stored primitive polynomial for m=" + std::to_string(m) +
                        " (supported: 2..10)");
  }
}

BinaryExtField::BinaryExtField(std::size_t m) : BinaryExtField(m, primitive_polynomial(m)) {}

BinaryExtField::BinaryExtField(std::size_t m, std::uint32_t poly) : m_(m), poly_(poly) {
  if (m < 1 || m > 20) throw ConfigError("extension degree out of range");
  if (std::bit_width(poly) != m + 1) {
    throw ConfigError("polynomial does not have degree " + std::to_string(m));
  }
  order_ = (1u << m) - 1;
  build();
}

void BinaryExtField::build() {
  exp_.assign(order_, 0);
  log_.assign(order_ + 1, 0);
  std::uint32_t x = 1;
  for (std::uint32_t k = 0; k < order_; ++k) {
    if (x == 1 && k > 0) {
      throw ConfigError("x has order " + std::to_string(k) + " < 2^m - 1; polynomial " +
                        std::to_string(poly_) + " is not primitive");
    }
    exp_[k] = x;
    log_[x] = k;
    x <<= 1;
    if (x & (1u << m_)) x ^= poly_;
  }
  if (x != 1) throw ConfigError("polynomial is not primitive");
}

std::uint32_t BinaryExtField::mul(std::uint32_t a, std::uint32_t b) const {
  if (a == 0 || b == 0) return 0;
  return exp_[(log_[a] + log_[b]) % order_];
}

FieldMatrix bch_parity_check(std::size_t m, std::size_t s, BchOptions options) {
  const BinaryExtField field(m);
  const std::size_t n = field.order();
  if (s < 2 || s - 1 >= n) {
    throw ConfigError("BCH distance must satisfy 1 <= s - 1 < 2^m - 1 (s=" +
                      std::to_string(s) + ", m=" + std::to_string(m) + ")");
  }
  std::vector<std::size_t> powers;
  for (std::size_t j = 1; j <= s - 1; ++j) {
    if (j % 2 == 1 || options.include_even_powers) powers.push_back(j);
  }
  FieldMatrix h(powers.size() * m, n, 2);
  for (std::size_t b = 0; b < powers.size(); ++b) {
    for (std::size_t t = 0; t < n; ++t) {
      const std::uint32_t e = field.alpha_pow(static_cast<std::uint64_t>(powers[b]) * t);
      for (std::size_t bit = 0; bit < m; ++bit) h.set(b * m + bit, t, (e >> bit) & 1u);
    }
  }
  return h;
}

BinaryIndependenceMatrix binary_independence_matrix(std::size_t n, std::size_t d) {
  if (n == 0 || d == 0 || d > n) throw ConfigError("need 1 <= d <= N");
  std::size_t m = 1;
  while ((std::size_t{1} << m) - 1 < n) ++m;
  m = std::max<std::size_t>(m, 2);
  const std::size_t length = (std::size_t{1} << m) - 1;
  const std::size_t target = 2 * d / m;
  if (target < 2) {
    throw ConfigError("degenerate parameters: floor(2d/m) - 1 = " +
                      std::to_string(static_cast<long long>(target) - 1) +
                      " < 1 (N=" + std::to_string(n) + ", d=" + std::to_string(d) + ")");
  }
  // Largest odd s with ceil((s-1)/2) * m <= d and s - 1 < 2^m - 1.
  std::size_t blocks = d / m;
  while (blocks > 0 && 2 * blocks >= length) --blocks;
  const std::size_t s = 2 * blocks + 1;
  const FieldMatrix h = bch_parity_check(m, s);

  BinaryIndependenceMatrix out{FieldMatrix(n, d, 2), m, s, std::min(target - 1, s - 1)};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < h.rows(); ++c) out.k.set(r, c, h.at(c, r));
  }
  return out;
}

std::optional<std::size_t> min_code_distance(const FieldMatrix& h) {
  if (h.modulus() != 2) throw FieldError("min_code_distance expects a binary matrix");
  const auto basis = h.null_space_basis();
  if (basis.empty()) return std::nullopt;
  if (basis.size() > kMaxNullSpaceDim) {
    throw EnumerationCapError("null space too large to enumerate",
                              std::uint64_t{1} << std::min<std::size_t>(basis.size(), 63),
                              std::uint64_t{1} << kMaxNullSpaceDim);
  }
  const std::size_t words = (h.cols() + 63) / 64;
  std::vector<std::vector<std::uint64_t>> packed(basis.size(),
                                                 std::vector<std::uint64_t>(words, 0));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    for (std::size_t c = 0; c < h.cols(); ++c) {
      if (basis[b][c]) packed[b][c / 64] |= std::uint64_t{1} << (c % 64);
    }
  }
  // Gray-code walk over all 2^k - 1 nonzero codewords.
  std::vector<std::uint64_t> word(words, 0);
  std::size_t best = h.cols() + 1;
  const std::uint64_t count = std::uint64_t{1} << basis.size();
  for (std::uint64_t g = 1; g < count; ++g) {
    const auto flip = static_cast<std::size_t>(std::countr_zero(g));
    std::size_t weight = 0;
    for (std::size_t w = 0; w < words; ++w) {
      word[w] ^= packed[flip][w];
      weight += static_cast<std::size_t>(std::popcount(word[w]));
    }
    best = std::min(best, weight);
  }
  return best;
}

}  // namespace iolab::codes
