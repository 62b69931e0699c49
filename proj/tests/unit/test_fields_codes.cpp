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

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "iolab/codes.hpp"
#include "iolab/errors.hpp"
#include "iolab/field_matrix.hpp"

using namespace iolab;
using namespace iolab::codes;

namespace {

// Independent oracles: brute force over coefficient vectors and the
// Leibniz expansion, both exponential and only used on tiny inputs.

bool independent_brute(const FieldMatrix& m, const std::vector<std::size_t>& rows) {
  const std::uint64_t q = m.modulus();
  const std::size_t k = rows.size();
  std::vector<std::uint64_t> coef(k, 0);
  while (true) {
    std::size_t p = 0;
    while (p < k && ++coef[p] == q) coef[p++] = 0;
    if (p == k) return true;  // wrapped: every nonzero combination tried
    bool zero = true;
    for (std::size_t c = 0; c < m.cols() && zero; ++c) {
      std::uint64_t acc = 0;
      for (std::size_t i = 0; i < k; ++i) acc = (acc + coef[i] * m.at(rows[i], c)) % q;
      zero = acc == 0;
    }
    if (zero) return false;
  }
}

std::uint64_t leibniz(const FieldMatrix& m) {
  const std::size_t n = m.rows();
  const std::uint64_t q = m.modulus();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t det = 0;
  do {
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    }
    std::uint64_t term = 1;
    for (std::size_t i = 0; i < n; ++i) term = term * m.at(i, perm[i]) % q;
    det = inversions % 2 ? (det + q - term) % q : (det + term) % q;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

// Minimum weight of a nonzero binary vector in the kernel of h, by trying
// all 2^cols vectors.
std::size_t distance_brute(const FieldMatrix& h) {
  std::size_t best = h.cols() + 1;
  for (std::uint32_t x = 1; x < (1u << h.cols()); ++x) {
    bool in_kernel = true;
    for (std::size_t r = 0; r < h.rows() && in_kernel; ++r) {
      std::uint64_t parity = 0;
      for (std::size_t c = 0; c < h.cols(); ++c) parity ^= ((x >> c) & 1u) & h.at(r, c);
      in_kernel = parity == 0;
    }
    if (in_kernel) best = std::min<std::size_t>(best, static_cast<std::size_t>(__builtin_popcount(x)));
  }
  return best;
}

FieldMatrix from_rows(std::uint64_t q, std::vector<std::vector<std::uint64_t>> rows) {
  FieldMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size(), q);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

}  // namespace

TEST_CASE("field matrix basics") {
  CHECK_THROWS_AS(FieldMatrix(2, 2, 15), FieldError);
  const auto m = from_rows(7, {{1, 2, 3}, {2, 4, 6}, {0, 1, 5}});
  CHECK(m.rank() == 2);
  CHECK(m.determinant() == 0);
  CHECK(m.transpose().at(2, 0) == 3);
  const auto nb = m.null_space_basis();
  REQUIRE(nb.size() == 1);
  for (std::size_t r = 0; r < 3; ++r) {
    std::uint64_t acc = 0;
    for (std::size_t c = 0; c < 3; ++c) acc = (acc + m.at(r, c) * nb[0][c]) % 7;
    CHECK(acc == 0);
  }
  std::stringstream ss;
  write_csv(ss, m);
  CHECK(read_field_csv(ss, 7) == m);
  CHECK(binomial(15, 4) == 1365);
  CHECK(binomial(8, 3) == 56);
  CHECK(binomial(3, 5) == 0);
}

TEST_CASE("property: rank and determinant agree with brute force") {
  std::mt19937_64 rng(31);
  for (std::uint64_t q : {2, 3, 5, 7}) {
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 1 + rng() % 4;
      FieldMatrix m(n, n, q);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m.set(r, c, rng() % q);
      }
      CHECK(m.determinant() == leibniz(m));
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      CHECK((m.rank() == n) == independent_brute(m, all));
      CHECK((m.determinant() != 0) == (m.rank() == n));
      CHECK(m.rank() == m.transpose().rank());
      CHECK(m.rank() + m.null_space_basis().size() == n);
    }
  }
}

TEST_CASE("Vandermonde q=7, N=5, d=2") {
  const auto v = vandermonde_matrix(5, 2, 7);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(v.at(i, 0) == 1);
    CHECK(v.at(i, 1) == i + 1);
  }
  CHECK(all_k_subsets_independent(v, 2).independent);
  // Each 2x2 determinant is the product of node differences.
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t b = a + 1; b < 5; ++b) {
      const std::vector<std::size_t> rows{a, b};
      const std::vector<std::uint64_t> nodes{a + 1, b + 1};
      CHECK(v.select_rows(rows).determinant() == vandermonde_determinant(nodes, 7));
      CHECK(vandermonde_determinant(nodes, 7) == (b - a) % 7);
    }
  }
}

TEST_CASE("Vandermonde q=17, N=8, d=3: every triple independent") {
  const auto v = vandermonde_matrix(8, 3, 17);
  const auto check = all_k_subsets_independent(v, 3);
  CHECK(check.independent);
  CHECK(check.subsets_checked == 56);
  CHECK_FALSE(check.witness);
  std::size_t brute = 0;
  for (std::size_t a = 0; a < 8; ++a) {
    for (std::size_t b = a + 1; b < 8; ++b) {
      for (std::size_t c = b + 1; c < 8; ++c) brute += independent_brute(v, {a, b, c});
    }
  }
  CHECK(brute == 56);
}

TEST_CASE("Vandermonde determinant product formula matches elimination") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const std::uint64_t q = 13;
    std::vector<std::uint64_t> nodes(1 + rng() % 5);
    for (auto& x : nodes) x = rng() % q;
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::shuffle(nodes.begin(), nodes.end(), rng);
    const auto v = vandermonde_from_nodes(nodes, nodes.size(), q);
    CHECK(v.determinant() == leibniz(v));
    CHECK(v.determinant() == vandermonde_determinant(nodes, q));
    CHECK(v.determinant() != 0);
  }
}

TEST_CASE("Vandermonde edge cases") {
  const auto v = vandermonde_matrix(4, 1, 5);
  for (std::size_t i = 0; i < 4; ++i) CHECK(v.at(i, 0) == 1);
  CHECK(all_k_subsets_independent(v, 1).independent);
  CHECK_THROWS_AS(vandermonde_matrix(7, 2, 7), ConfigError);
  CHECK_THROWS_AS(vandermonde_matrix(5, 2, 9), FieldError);
  CHECK_THROWS_AS(vandermonde_matrix(5, 6, 7), ConfigError);
  const std::vector<std::uint64_t> dup{1, 8};
  CHECK_THROWS_AS(vandermonde_from_nodes(dup, 2, 7), ConfigError);
}

TEST_CASE("subset check reports witnesses") {
  const auto dup = from_rows(5, {{1, 2}, {3, 4}, {1, 2}});
  const auto r = all_k_subsets_independent(dup, 2);
  CHECK_FALSE(r.independent);
  REQUIRE(r.witness);
  CHECK(*r.witness == std::vector<std::size_t>{0, 2});

  const FieldMatrix zero(3, 2, 5);
  const auto z = all_k_subsets_independent(zero, 1);
  CHECK_FALSE(z.independent);
  CHECK(*z.witness == std::vector<std::size_t>{0});

  CHECK_THROWS_AS(all_k_subsets_independent(zero, 4), ConfigError);
  FieldMatrix tall(200, 3, 2);
  CHECK_THROWS_AS(all_k_subsets_independent(tall, 5), EnumerationCapError);
}

TEST_CASE("binary extension field") {
  for (std::size_t m = 2; m <= 10; ++m) {
    const BinaryExtField f(m);
    CHECK(f.order() == (1u << m) - 1);
    std::vector<char> seen(f.order() + 1, 0);
    for (std::uint32_t k = 0; k < f.order(); ++k) {
      const std::uint32_t x = f.alpha_pow(k);
      CHECK(x != 0);
      CHECK_FALSE(seen[x]);
      seen[x] = 1;
    }
    CHECK(f.mul(f.alpha_pow(3), f.alpha_pow(f.order() - 3)) == 1);
  }
  CHECK_THROWS_AS(primitive_polynomial(11), ConfigError);
  CHECK_THROWS_AS(BinaryExtField(4, 0x1F), ConfigError);  // x^4+x^3+x^2+x+1 has order 5
}

TEST_CASE("BCH m=4, s=5 is the (15, 7, 5) code") {
  const auto h = bch_parity_check(4, 5);
  CHECK(h.cols() == 15);
  CHECK(h.rows() <= 8);
  CHECK(15 - h.rank() >= 7);
  CHECK(min_code_distance(h) == 5u);
  CHECK(distance_brute(h) == 5);
  const auto cols = all_k_subsets_independent(h.transpose(), 4);
  CHECK(cols.independent);
  CHECK(cols.subsets_checked == 1365);
  CHECK_FALSE(all_k_subsets_independent(h.transpose(), 5).independent);
}

TEST_CASE("BCH m=3, s=3 is Hamming(7,4)") {
  const auto h = bch_parity_check(3, 3);
  CHECK(h.rows() <= 3);
  CHECK(h.cols() == 7);
  CHECK(7 - h.rank() == 4);
  CHECK(h.null_space_basis().size() == 4);  // 16 codewords
  CHECK(min_code_distance(h) == 3u);
  CHECK(distance_brute(h) == 3);
}

TEST_CASE("even powers add no constraints") {
  for (std::size_t m : {3, 4, 5}) {
    for (std::size_t s : {3, 5, 7}) {
      if (s - 1 >= (1u << m) - 1) continue;
      const auto odd = bch_parity_check(m, s);
      const auto all = bch_parity_check(m, s, BchOptions{.include_even_powers = true});
      CHECK(all.rows() > odd.rows());
      CHECK(all.rank() == odd.rank());
      CHECK(odd.stack(all).rank() == odd.rank());
      CHECK(odd.rows() <= ((s - 1 + 1) / 2) * m);
    }
  }
}

TEST_CASE("property: designed distance holds") {
  for (std::size_t m : {3, 4, 5}) {
    for (std::size_t s = 2; s <= 7; ++s) {
      if (s - 1 >= (1u << m) - 1) continue;
      const auto h = bch_parity_check(m, s);
      if (m <= 4) {
        const auto dist = min_code_distance(h);
        if (dist) CHECK(*dist >= s);
        CHECK(distance_brute(h) >= s);
      } else {
        // Null space too large to enumerate; check the column form instead.
        CHECK(all_k_subsets_independent(h.transpose(), s - 1).independent);
      }
    }
  }
  CHECK_THROWS_AS(bch_parity_check(3, 8), ConfigError);
  CHECK_THROWS_AS(bch_parity_check(3, 1), ConfigError);
  CHECK_THROWS_AS(bch_parity_check(12, 3), ConfigError);
}

TEST_CASE("binary independence matrix") {
  const auto b = binary_independence_matrix(15, 8);
  CHECK(b.k.rows() == 15);
  CHECK(b.k.cols() == 8);
  CHECK(b.m == 4);
  CHECK(b.independence == 3);
  const auto triples = all_k_subsets_independent(b.k, 3);
  CHECK(triples.independent);
  CHECK(triples.subsets_checked == 455);

  const auto h = binary_independence_matrix(7, 3);
  CHECK(h.independence == 1);
  for (std::size_t i = 0; i < 7; ++i) {
    bool nonzero = false;
    for (std::size_t c = 0; c < 3; ++c) nonzero |= h.k.at(i, c) != 0;
    CHECK(nonzero);
  }

  // Rows of K are columns of H, zero padded to d.
  const auto parity = bch_parity_check(b.m, b.s);
  for (std::size_t i = 0; i < 15; ++i) {
    for (std::size_t c = 0; c < 8; ++c) {
      CHECK(b.k.at(i, c) == (c < parity.rows() ? parity.at(c, i) : 0));
    }
  }

  CHECK_THROWS_AS(binary_independence_matrix(15, 2), ConfigError);
  CHECK_THROWS_AS(binary_independence_matrix(4, 5), ConfigError);
}

TEST_CASE("property: independence parameter holds on a grid") {
  for (std::size_t n : {3, 5, 7, 10, 15, 20, 31}) {
    for (std::size_t d = 1; d <= std::min<std::size_t>(n, 12); ++d) {
      BinaryIndependenceMatrix b;
      try {
        b = binary_independence_matrix(n, d);
      } catch (const ConfigError&) {
        continue;
      }
      CAPTURE(n);
      CAPTURE(d);
      CHECK(b.independence >= 1);
      if (binomial(n, b.independence) <= 200000) {
        CHECK(all_k_subsets_independent(b.k, b.independence).independent);
      }
    }
  }
}

TEST_CASE("min distance edge cases") {
  FieldMatrix full(3, 3, 2);
  for (std::size_t i = 0; i < 3; ++i) full.set(i, i, 1);
  CHECK_FALSE(min_code_distance(full));
  CHECK_THROWS_AS(min_code_distance(FieldMatrix(1, 3, 3)), FieldError);
  CHECK_THROWS_AS(min_code_distance(FieldMatrix(1, 25, 2)), EnumerationCapError);
}
