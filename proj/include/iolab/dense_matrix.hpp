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
#include <random>
#include <span>
#include <string>
#include <vector>

namespace iolab {

// Half-open row and column ranges of one block of a blocked matrix.
struct BlockExtent {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;

  std::size_t rows() const { return row_end - row_begin; }
  std::size_t cols() const { return col_end - col_begin; }
};

inline std::size_t ceil_div(std::size_t a, std::size_t b) {
  return (a + b - 1) / b;
}

// Block (i, j) of size B, 0-based, clipped at the matrix boundary. Block i
// covers rows [i*B, min((i+1)*B, rows)).
BlockExtent block_extent(std::size_t rows, std::size_t cols, std::size_t b,
                         std::size_t i, std::size_t j);

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix uniform(std::size_t rows, std::size_t cols,
                             double magnitude, std::mt19937_64& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> data() const { return data_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  BlockExtent block(std::size_t b, std::size_t i, std::size_t j) const {
    return block_extent(rows_, cols_, b, i, j);
  }

  DenseMatrix transpose() const;
  double frobenius_norm() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

// ||a - b||_F / ||b||_F (absolute error when b is zero).
double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b);

// One row per line, comma separated, round-trip precision.
void write_csv(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_csv(std::istream& in);

// Little-endian: uint32 rows, uint32 cols, then rows*cols float64 values.
void write_binary(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_binary(std::istream& in);

// Dispatches on extension: ".bin" is binary, everything else CSV.
DenseMatrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const DenseMatrix& m);

}  // namespace iolab
