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

// Matrix-entry compression: Alice holds Q, K over F_q and sends a message
// from which Bob recovers the entries of Q K^T indexed by a set I. This
// module counts distinct outputs exhaustively (the lower-bound side),
// implements the direct upper-bound protocol, and evaluates the per-epoch
// progress cap the I/O lower bounds are built on.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "iolab/field_matrix.hpp"

namespace iolab::compress {

using codes::FieldMatrix;

// 0-based (row, col) pairs into an N x N matrix.
class IndexSet {
 public:
  using Entry = std::pair<std::size_t, std::size_t>;

  IndexSet() = default;
  // Deduplicates and sorts; throws ConfigError on out-of-range entries.
  IndexSet(std::size_t n, std::vector<Entry> entries);

  static IndexSet column(std::size_t n, std::size_t col, std::span<const std::size_t> rows);
  // All entries of rows x cols.
  static IndexSet block(std::size_t n, std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols);

  std::size_t n() const { return n_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::span<const Entry> entries() const { return entries_; }

  std::vector<std::size_t> distinct_rows() const;  // R_I
  std::vector<std::size_t> distinct_cols() const;  // C_I
  std::vector<std::size_t> row_entries(std::size_t i) const;  // R_i
  std::vector<std::size_t> col_entries(std::size_t j) const;  // C_j

 private:
  std::size_t n_ = 0;
  std::vector<Entry> entries_;
};

// CSV of "row,col" lines, 0-based.
IndexSet read_index_csv(std::istream& in, std::size_t n);

// sum over i in R_I of min(|R_i|, cap).
std::size_t row_rank_exponent(const IndexSet& index, std::size_t cap);

inline constexpr std::uint64_t kDefaultCountCap = 10'000'000;

// Number of distinct tuples ((Q K^T)[i, j]) for (i, j) in I as the rows of
// Q listed in `free_rows` range over all of F_q^d and every other row of Q
// is zero. Defaults to free_rows = R_I. K is N x d over F_q. Throws
// EnumerationCapError when q^(|free_rows| d) exceeds the cap.
std::uint64_t distinct_output_count(const FieldMatrix& k, const IndexSet& index,
                                    std::optional<std::vector<std::size_t>> free_rows = {});

// ceil(log_q(count)): field symbols needed to tell `count` outputs apart.
std::uint64_t cc_lower_bound_symbols(std::uint64_t count, std::uint64_t q);

// Bits for a message of `symbols` field symbols: symbols * ceil(log2 q).
std::uint64_t message_bits(std::uint64_t symbols, std::uint64_t q);

enum class Strategy {
  SendEntries,  // the |I| values of Q K^T
  SendRows,     // rows of Q in R_I and rows of K in C_I
};

struct Message {
  Strategy strategy = Strategy::SendEntries;
  std::vector<std::uint64_t> symbols;
};

struct DecodedEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  std::uint64_t value = 0;

  friend bool operator==(const DecodedEntry&, const DecodedEntry&) = default;
};

// The cheaper of the two direct one-way protocols for a fixed index set;
// ties go to SendRows. The strategy depends only on I, d and q.
class DirectCompressionProtocol {
 public:
  DirectCompressionProtocol(IndexSet index, std::size_t d, std::uint64_t q);

  Strategy strategy() const { return strategy_; }
  std::size_t message_length() const;  // in field symbols

  Message encode(const FieldMatrix& q, const FieldMatrix& k) const;
  // Every entry of I with its value, in IndexSet order.
  std::vector<DecodedEntry> decode(const Message& message) const;

 private:
  IndexSet index_;
  std::size_t d_ = 0;
  std::uint64_t q_ = 2;
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
  Strategy strategy_ = Strategy::SendEntries;
};

struct DirectProtocolRun {
  DirectCompressionProtocol protocol;
  Message message;
  std::size_t length = 0;
};

DirectProtocolRun direct_compression_protocol(const FieldMatrix& q, const FieldMatrix& k,
                                              const IndexSet& index);

enum class FieldRegime { LargeField, Binary };

// Per-epoch cap on newly computed Q K^T entries with unit constants:
// large field max(ceil(M^2/d^2), M); binary max(ceil(M^2 ceil(log2 N)^2 / d^2), M).
std::uint64_t epoch_progress_bound(std::uint64_t m, std::uint64_t d, FieldRegime regime,
                                   std::uint64_t n);

}  // namespace iolab::compress
