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

#include "iolab/dense_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "iolab/errors.hpp"

namespace iolab {

BlockExtent block_extent(std::size_t rows, std::size_t cols, std::size_t b,
                         std::size_t i, std::size_t j) {
  BlockExtent e;
  e.row_begin = std::min(i * b, rows);
  e.row_end = std::min((i + 1) * b, rows);
  e.col_begin = std::min(j * b, cols);
  e.col_end = std::min((j + 1) * b, cols);
  return e;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ConfigError("matrix data has " + std::to_string(data_.size()) +
                      " entries, expected " + std::to_string(rows * cols));
  }
}

DenseMatrix DenseMatrix::uniform(std::size_t rows, std::size_t cols,
                                 double magnitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-magnitude, magnitude);
  DenseMatrix m(rows, cols);
  for (double& x : m.data_) x = dist(rng);
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw ConfigError("matmul: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError("relative_frobenius_error: shape mismatch");
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    const double e = a.data()[i] - b.data()[i];
    diff += e * e;
  }
  const double denom = b.frobenius_norm();
  return denom == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / denom;
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
  std::ostringstream line;
  line.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line.str("");
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) line << ',';
      line << m(r, c);
    }
    out << line.str() << '\n';
  }
}

DenseMatrix read_csv(std::istream& in) {
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        data.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("matrix CSV: bad number '" + cell + "' on row " +
                          std::to_string(rows + 1));
      }
      ++n;
    }
    if (rows == 0) cols = n;
    if (n != cols) {
      throw ConfigError("matrix CSV: row " + std::to_string(rows + 1) +
                        " has " + std::to_string(n) + " columns, expected " +
                        std::to_string(cols));
    }
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(data));
}

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::endian::native == std::endian::little,
                "binary matrix I/O assumes a little-endian host");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw ConfigError("binary matrix: truncated input");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void write_binary(std::ostream& out, const DenseMatrix& m) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (double x : m.data()) put_le<double>(out, x);
}

DenseMatrix read_binary(std::istream& in) {
  const auto rows = get_le<std::uint32_t>(in);
  const auto cols = get_le<std::uint32_t>(in);
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (double& x : data) x = get_le<double>(in);
  return DenseMatrix(rows, cols, std::move(data));
}

namespace {
bool is_binary_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
}
}  // namespace

DenseMatrix load_matrix(const std::string& path) {
  const bool binary = is_binary_path(path);
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw ConfigError("cannot open matrix file " + path);
  return binary ? read_binary(in) : read_csv(in);
}

void save_matrix(const std::string& path, const DenseMatrix& m) {
  const bool binary = is_binary_path(path);
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ConfigError("cannot write matrix file " + path);
  if (binary) {
    write_binary(out, m);
  } else {
    write_csv(out, m);
  }
}

}  // namespace iolab
