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

#include "iolab/field_matrix.hpp"

#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "iolab/errors.hpp"
#include "iolab/modular.hpp"

namespace iolab::codes {

FieldMatrix::FieldMatrix(std::size_t rows, std::size_t cols, std::uint64_t q)
    : rows_(rows), cols_(cols), q_(q), data_(rows * cols, 0) {
  if (!is_prime(q)) throw FieldError("modulus " + std::to_string(q) + " is not prime");
}

FieldMatrix FieldMatrix::transpose() const {
  FieldMatrix t(cols_, rows_, q_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t.data_[c * rows_ + r] = at(r, c);
  }
  return t;
}

FieldMatrix FieldMatrix::select_rows(std::span<const std::size_t> rows) const {
  FieldMatrix out(rows.size(), cols_, q_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < cols_; ++c) out.data_[i * cols_ + c] = at(rows[i], c);
  }
  return out;
}

FieldMatrix FieldMatrix::select_cols(std::span<const std::size_t> cols) const {
  FieldMatrix out(rows_, cols.size(), q_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out.data_[r * cols.size() + i] = at(r, cols[i]);
    }
  }
  return out;
}

FieldMatrix FieldMatrix::stack(const FieldMatrix& other) const {
  if (other.cols_ != cols_ || other.q_ != q_) {
    throw ConfigError("stack: column count or modulus mismatch");
  }
  FieldMatrix out(rows_ + other.rows_, cols_, q_);
  std::copy(data_.begin(), data_.end(), out.data_.begin());
  std::copy(other.data_.begin(), other.data_.end(),
            out.data_.begin() + static_cast<std::ptrdiff_t>(data_.size()));
  return out;
}

namespace {

// Row-reduces `a` in place to reduced row echelon form. Returns pivot
// columns; `det` (if given) receives the determinant for square input.
std::vector<std::size_t> row_reduce(std::vector<std::uint64_t>& a, std::size_t rows,
                                    std::size_t cols, std::uint64_t q,
                                    std::uint64_t* det) {
  std::vector<std::size_t> pivots;
  std::uint64_t sign_det = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && a[pivot * cols + c] == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != r) {
      for (std::size_t k = 0; k < cols; ++k) std::swap(a[r * cols + k], a[pivot * cols + k]);
      sign_det = sub_mod(0, sign_det, q);
    }
    const std::uint64_t pv = a[r * cols + c];
    sign_det = mul_mod(sign_det, pv, q);
    const std::uint64_t inv = inv_mod(pv, q);
    for (std::size_t k = 0; k < cols; ++k) a[r * cols + k] = mul_mod(a[r * cols + k], inv, q);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r) continue;
      const std::uint64_t f = a[i * cols + c];
      if (f == 0) continue;
      for (std::size_t k = 0; k < cols; ++k) {
        a[i * cols + k] = sub_mod(a[i * cols + k], mul_mod(f, a[r * cols + k], q), q);
      }
    }
    pivots.push_back(c);
    ++r;
  }
  if (det) *det = (pivots.size() == rows && rows == cols) ? sign_det : 0;
  return pivots;
}

}  // namespace

std::size_t FieldMatrix::rank() const {
  auto a = data_;
  return row_reduce(a, rows_, cols_, q_, nullptr).size();
}

std::uint64_t FieldMatrix::determinant() const {
  if (rows_ != cols_) throw ConfigError("determinant of a non-square matrix");
  if (rows_ == 0) return 1 % q_;
  auto a = data_;
  std::uint64_t det = 0;
  row_reduce(a, rows_, cols_, q_, &det);
  return det;
}

std::vector<std::vector<std::uint64_t>> FieldMatrix::null_space_basis() const {
  auto a = data_;
  const auto pivots = row_reduce(a, rows_, cols_, q_, nullptr);
  std::vector<char> is_pivot(cols_, 0);
  for (std::size_t c : pivots) is_pivot[c] = 1;
  std::vector<std::vector<std::uint64_t>> basis;
  for (std::size_t f = 0; f < cols_; ++f) {
    if (is_pivot[f]) continue;
    std::vector<std::uint64_t> x(cols_, 0);
    x[f] = 1;
    for (std::size_t i = 0; i < pivots.size(); ++i) {
      x[pivots[i]] = sub_mod(0, a[i * cols_ + f], q_);
    }
    basis.push_back(std::move(x));
  }
  return basis;
}

void write_csv(std::ostream& out, const FieldMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << m.at(r, c);
    }
    out << '\n';
  }
}

FieldMatrix read_field_csv(std::istream& in, std::uint64_t q) {
  std::vector<std::vector<std::uint64_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::uint64_t> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stoull(cell));
      } catch (const std::exception&) {
        throw ConfigError("field matrix CSV: bad integer '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("field matrix CSV: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  FieldMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size(), q);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c]);
  }
  return m;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  u128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(result);
}

SubsetCheck all_k_subsets_independent(const FieldMatrix& m, std::size_t k) {
  if (k > m.rows()) {
    throw ConfigError("subset size " + std::to_string(k) + " exceeds " +
                      std::to_string(m.rows()) + " rows");
  }
  const std::uint64_t total = binomial(m.rows(), k);
  const std::uint64_t cap = enumeration_cap(kDefaultSubsetCap);
  if (total > cap) {
    throw EnumerationCapError("too many row subsets to enumerate", total, cap);
  }
  SubsetCheck out;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    ++out.subsets_checked;
    if (m.select_rows(idx).rank() != k) {
      out.independent = false;
      out.witness = idx;
      return out;
    }
    // Next combination in lexicographic order.
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == m.rows() - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace iolab::codes
