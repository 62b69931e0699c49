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

#include "iolab/compression.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_set>

#include "iolab/errors.hpp"
#include "iolab/modular.hpp"

namespace iolab::compress {

IndexSet::IndexSet(std::size_t n, std::vector<Entry> entries)
    : n_(n), entries_(std::move(entries)) {
  for (const auto& [r, c] : entries_) {
    if (r >= n || c >= n) {
      throw ConfigError("index (" + std::to_string(r) + ", " + std::to_string(c) +
                        ") outside [" + std::to_string(n) + "]^2");
    }
  }
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
}

IndexSet IndexSet::column(std::size_t n, std::size_t col,
                          std::span<const std::size_t> rows) {
  std::vector<Entry> e;
  for (std::size_t r : rows) e.emplace_back(r, col);
  return IndexSet(n, std::move(e));
}

IndexSet IndexSet::block(std::size_t n, std::span<const std::size_t> rows,
                         std::span<const std::size_t> cols) {
  std::vector<Entry> e;
  for (std::size_t r : rows) {
    for (std::size_t c : cols) e.emplace_back(r, c);
  }
  return IndexSet(n, std::move(e));
}

std::vector<std::size_t> IndexSet::distinct_rows() const {
  std::vector<std::size_t> out;
  for (const auto& e : entries_) {
    if (out.empty() || out.back() != e.first) out.push_back(e.first);
  }
  return out;
}

std::vector<std::size_t> IndexSet::distinct_cols() const {
  std::vector<std::size_t> out;
  for (const auto& e : entries_) out.push_back(e.second);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::size_t> IndexSet::row_entries(std::size_t i) const {
  std::vector<std::size_t> out;
  for (const auto& e : entries_) {
    if (e.first == i) out.push_back(e.second);
  }
  return out;
}

std::vector<std::size_t> IndexSet::col_entries(std::size_t j) const {
  std::vector<std::size_t> out;
  for (const auto& e : entries_) {
    if (e.second == j) out.push_back(e.first);
  }
  return out;
}

IndexSet read_index_csv(std::istream& in, std::size_t n) {
  std::vector<IndexSet::Entry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string a;
    std::string b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw ConfigError("index CSV: expected 'row,col', got '" + line + "'");
    }
    try {
      entries.emplace_back(std::stoull(a), std::stoull(b));
    } catch (const std::exception&) {
      throw ConfigError("index CSV: bad integer in '" + line + "'");
    }
  }
  return IndexSet(n, std::move(entries));
}

std::size_t row_rank_exponent(const IndexSet& index, std::size_t cap) {
  std::size_t total = 0;
  for (std::size_t i : index.distinct_rows()) {
    total += std::min(index.row_entries(i).size(), cap);
  }
  return total;
}

namespace {

struct TupleHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint64_t x : v) {
      h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

std::uint64_t distinct_output_count(const FieldMatrix& k, const IndexSet& index,
                                    std::optional<std::vector<std::size_t>> free_rows) {
  const std::uint64_t q = k.modulus();
  const std::size_t n = k.rows();
  const std::size_t d = k.cols();
  if (index.n() != n && !index.empty()) {
    throw ConfigError("index set is over [" + std::to_string(index.n()) +
                      "]^2 but K has " + std::to_string(n) + " rows");
  }
  std::vector<std::size_t> rows = free_rows ? *free_rows : index.distinct_rows();
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (std::size_t r : rows) {
    if (r >= n) throw ConfigError("free row " + std::to_string(r) + " out of range");
  }

  const std::size_t digits = rows.size() * d;
  const std::uint64_t cap = enumeration_cap(kDefaultCountCap);
  u128 total = 1;
  for (std::size_t i = 0; i < digits; ++i) {
    total *= q;
    if (total > cap) {
      const std::uint64_t shown =
          total > std::numeric_limits<std::uint64_t>::max()
              ? std::numeric_limits<std::uint64_t>::max()
              : static_cast<std::uint64_t>(total);
      throw EnumerationCapError("distinct-output enumeration too large", shown, cap);
    }
  }

  // Position of each free row in the odometer; rows outside it stay zero.
  std::vector<std::size_t> slot_of(n, n);
  for (std::size_t s = 0; s < rows.size(); ++s) slot_of[rows[s]] = s;

  std::vector<std::uint64_t> digit(digits, 0);  // free row s, column l at s*d+l
  std::vector<std::uint64_t> tuple(index.size());
  std::unordered_set<std::vector<std::uint64_t>, TupleHash> seen;
  const auto entries = index.entries();
  for (std::uint64_t step = 0; step < static_cast<std::uint64_t>(total); ++step) {
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto [i, j] = entries[e];
      std::uint64_t acc = 0;
      if (slot_of[i] != n) {
        const std::uint64_t* qi = digit.data() + slot_of[i] * d;
        for (std::size_t l = 0; l < d; ++l) acc = add_mod(acc, mul_mod(qi[l], k.at(j, l), q), q);
      }
      tuple[e] = acc;
    }
    seen.insert(tuple);
    for (std::size_t p = 0; p < digits; ++p) {
      if (++digit[p] < q) break;
      digit[p] = 0;
    }
  }
  return seen.size();
}

std::uint64_t cc_lower_bound_symbols(std::uint64_t count, std::uint64_t q) {
  if (count == 0) throw ConfigError("count must be at least 1");
  if (q < 2) throw ConfigError("alphabet size must be at least 2");
  std::uint64_t symbols = 0;
  u128 reach = 1;
  while (reach < count) {
    reach *= q;
    ++symbols;
  }
  return symbols;
}

std::uint64_t message_bits(std::uint64_t symbols, std::uint64_t q) {
  return symbols * static_cast<std::uint64_t>(std::bit_width(q - 1));
}

DirectCompressionProtocol::DirectCompressionProtocol(IndexSet index, std::size_t d,
                                                     std::uint64_t q)
    : index_(std::move(index)), d_(d), q_(q) {
  rows_ = index_.distinct_rows();
  cols_ = index_.distinct_cols();
  const std::size_t entries = index_.size();
  const std::size_t by_rows = d_ * (rows_.size() + cols_.size());
  strategy_ = by_rows <= entries ? Strategy::SendRows : Strategy::SendEntries;
}

std::size_t DirectCompressionProtocol::message_length() const {
  return strategy_ == Strategy::SendRows ? d_ * (rows_.size() + cols_.size())
                                         : index_.size();
}

Message DirectCompressionProtocol::encode(const FieldMatrix& q, const FieldMatrix& k) const {
  if (q.cols() != d_ || k.cols() != d_ || q.modulus() != q_ || k.modulus() != q_) {
    throw ConfigError("protocol inputs do not match its d or q");
  }
  Message msg;
  msg.strategy = strategy_;
  if (strategy_ == Strategy::SendEntries) {
    for (const auto& [i, j] : index_.entries()) {
      std::uint64_t acc = 0;
      for (std::size_t l = 0; l < d_; ++l) acc = add_mod(acc, mul_mod(q.at(i, l), k.at(j, l), q_), q_);
      msg.symbols.push_back(acc);
    }
    return msg;
  }
  for (std::size_t i : rows_) {
    for (std::size_t l = 0; l < d_; ++l) msg.symbols.push_back(q.at(i, l));
  }
  for (std::size_t j : cols_) {
    for (std::size_t l = 0; l < d_; ++l) msg.symbols.push_back(k.at(j, l));
  }
  return msg;
}

std::vector<DecodedEntry> DirectCompressionProtocol::decode(const Message& message) const {
  if (message.strategy != strategy_ || message.symbols.size() != message_length()) {
    throw ConfigError("message does not match the protocol");
  }
  std::vector<DecodedEntry> out;
  if (strategy_ == Strategy::SendEntries) {
    std::size_t s = 0;
    for (const auto& [i, j] : index_.entries()) out.push_back({i, j, message.symbols[s++]});
    return out;
  }
  auto position = [](const std::vector<std::size_t>& v, std::size_t x) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  };
  const std::size_t k_offset = rows_.size() * d_;
  for (const auto& [i, j] : index_.entries()) {
    const std::uint64_t* qi = message.symbols.data() + position(rows_, i) * d_;
    const std::uint64_t* kj = message.symbols.data() + k_offset + position(cols_, j) * d_;
    std::uint64_t acc = 0;
    for (std::size_t l = 0; l < d_; ++l) acc = add_mod(acc, mul_mod(qi[l], kj[l], q_), q_);
    out.push_back({i, j, acc});
  }
  return out;
}

DirectProtocolRun direct_compression_protocol(const FieldMatrix& q, const FieldMatrix& k,
                                              const IndexSet& index) {
  DirectCompressionProtocol protocol(index, q.cols(), q.modulus());
  Message msg = protocol.encode(q, k);
  const std::size_t length = protocol.message_length();
  return DirectProtocolRun{std::move(protocol), std::move(msg), length};
}

std::uint64_t epoch_progress_bound(std::uint64_t m, std::uint64_t d, FieldRegime regime,
                                   std::uint64_t n) {
  if (m == 0 || d == 0 || n == 0) throw ConfigError("M, d, N must be positive");
  u128 numerator = static_cast<u128>(m) * m;
  if (regime == FieldRegime::Binary) {
    const std::uint64_t log_n = n <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(n - 1));
    numerator *= static_cast<u128>(log_n) * log_n;
  }
  const u128 dd = static_cast<u128>(d) * d;
  const u128 first = (numerator + dd - 1) / dd;
  const u128 best = std::max<u128>(first, m);
  return best > std::numeric_limits<std::uint64_t>::max()
             ? std::numeric_limits<std::uint64_t>::max()
             : static_cast<std::uint64_t>(best);
}

}  // namespace iolab::compress
