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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace iolab::codes {

// Dense matrix over the prime field F_q (q = 2 for binary matrices).
// Entries are stored reduced to [0, q).
class FieldMatrix {
 public:
  FieldMatrix() = default;
  // Throws FieldError unless q is prime.
  FieldMatrix(std::size_t rows, std::size_t cols, std::uint64_t q);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint64_t modulus() const { return q_; }

  std::uint64_t at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, std::uint64_t v) { data_[r * cols_ + c] = v % q_; }
  std::span<const std::uint64_t> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  FieldMatrix transpose() const;
  FieldMatrix select_rows(std::span<const std::size_t> rows) const;
  FieldMatrix select_cols(std::span<const std::size_t> cols) const;
  // Rows of `other` appended below; column counts and moduli must agree.
  FieldMatrix stack(const FieldMatrix& other) const;

  // Exact Gaussian elimination.
  std::size_t rank() const;
  // Square matrices only.
  std::uint64_t determinant() const;
  // Basis of { x : A x = 0 }, one vector of length cols() per element.
  std::vector<std::vector<std::uint64_t>> null_space_basis() const;

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::uint64_t q_ = 2;
  std::vector<std::uint64_t> data_;
};

// Integers, one row per line, comma separated.
void write_csv(std::ostream& out, const FieldMatrix& m);
FieldMatrix read_field_csv(std::istream& in, std::uint64_t q);

struct SubsetCheck {
  bool independent = true;
  // First dependent row subset in lexicographic order.
  std::optional<std::vector<std::size_t>> witness;
  std::uint64_t subsets_checked = 0;
};

inline constexpr std::uint64_t kDefaultSubsetCap = 1'000'000;

// True iff every k-row subset has rank k. Throws EnumerationCapError when
// C(rows, k) exceeds the cap (IOLAB_ENUM_CAP overrides the default).
SubsetCheck all_k_subsets_independent(const FieldMatrix& m, std::size_t k);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace iolab::codes
