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

// Attention kernels executed against the two-level memory simulator.
//
// Every kernel places Q, K, V in slow memory as the initial configuration,
// moves data through the cache with explicit reads, writes and frees, and
// returns the output read back from slow memory together with the exact
// I/O counts. Attention here is O = D^-1 exp(Q K^T) V with
// D = diag(exp(Q K^T) 1); there is no 1/sqrt(d) logit scaling.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "iolab/dense_matrix.hpp"
#include "iolab/memory_hierarchy.hpp"

namespace iolab::attn {

struct AttentionInstance {
  DenseMatrix q;
  DenseMatrix k;
  DenseMatrix v;

  std::size_t n() const { return q.rows(); }
  std::size_t d() const { return q.cols(); }

  // Throws ConfigError unless Q, K, V are all N x d with N, d >= 1.
  void validate() const;

  // Entries uniform in [-magnitude, magnitude].
  static AttentionInstance random(std::size_t n, std::size_t d,
                                  double magnitude, std::mt19937_64& rng);
};

// Slow-memory addresses used by the kernels. Inputs first, then the output,
// then the intermediates only some kernels materialize.
struct AttentionLayout {
  std::size_t n = 0;
  std::size_t d = 0;

  mem::Address q(std::size_t i, std::size_t l) const { return i * d + l; }
  mem::Address k(std::size_t j, std::size_t l) const { return n * d + j * d + l; }
  mem::Address v(std::size_t j, std::size_t c) const { return 2 * n * d + j * d + c; }
  mem::Address o(std::size_t i, std::size_t c) const { return 3 * n * d + i * d + c; }
  mem::Address a(std::size_t i, std::size_t j) const { return 4 * n * d + i * n + j; }
  mem::Address row_sum(std::size_t i) const { return 4 * n * d + n * n + i; }
  mem::Address row_max(std::size_t i) const { return 4 * n * d + n * n + n + i; }
  mem::Address qk(std::size_t i, std::size_t j) const {
    return 4 * n * d + n * n + 2 * n + i * n + j;
  }
};

enum class Algorithm { SquareTiling, Streaming };

const char* algorithm_name(Algorithm a);

struct EpochSummary {
  std::size_t epochs = 1;
  std::size_t max_io_per_epoch = 0;
  // Largest number of Q K^T entries first computed within one epoch.
  std::size_t max_entries_per_epoch = 0;
};

struct KernelResult {
  Algorithm algorithm = Algorithm::SquareTiling;
  DenseMatrix output;
  mem::IoStats io;
  EpochSummary epochs;
  // B for tiling, Q rows per block for streaming.
  std::size_t block_size = 0;
  // Number of I/O events issued before entry (i, j) of Q K^T was first
  // complete, indexed i * N + j.
  std::vector<std::uint64_t> qk_first_computed;
  bool overflowed = false;
};

inline constexpr std::uint64_t kNotComputed = ~std::uint64_t{0};

// Plain-memory oracle. Falls back to row-max stabilization only if the
// direct evaluation overflows.
DenseMatrix reference_attention(const AttentionInstance& inst);

// Same, always row-max stabilized.
DenseMatrix reference_attention_stabilized(const AttentionInstance& inst);

// B = floor(sqrt(M / 4)).
std::size_t tiling_block_size(std::size_t m);

struct TilingOptions {
  // Extra pass that computes and stores every row max of Q K^T, then
  // subtracts it before exponentiating. Needs 3B^2 + 2B <= M.
  bool row_max_prepass = false;
  // Write every Q K^T entry to memory the first time it is computed.
  bool write_qk_entries = false;
};

KernelResult square_tiling_attention(mem::MemoryHierarchy& h,
                                     const AttentionInstance& inst,
                                     TilingOptions options = {});

// Q rows kept resident per block: floor(M / (4d)), reduced until
// streaming_footprint fits in M. Throws RegimeError when M < 8d.
std::size_t streaming_block_rows(std::size_t m, std::size_t d);

// Peak cache occupancy of the streaming kernel with `rows` resident Q rows:
// Q block + accumulators + running sums and maxes + one K row + one V row +
// two scalar temporaries.
std::size_t streaming_footprint(std::size_t rows, std::size_t d);

KernelResult streaming_attention(mem::MemoryHierarchy& h,
                                 const AttentionInstance& inst);

// Streaming when M >= d^2 and M >= 8d, tiling otherwise.
Algorithm select_algorithm(std::size_t m, std::size_t d);

KernelResult dispatch_attention(mem::MemoryHierarchy& h,
                                const AttentionInstance& inst);

struct MatmulResult {
  DenseMatrix product;  // Q K^T
  KernelResult run;
};

// Square tiling with V = all ones, writing each Q K^T entry to memory the
// first time it is complete. The attention output is discarded.
MatmulResult matmul_via_attention(mem::MemoryHierarchy& h, const DenseMatrix& q,
                                  const DenseMatrix& k);

// Epoch split of the hierarchy's trace with epoch size M, plus the largest
// per-epoch count of first-computed Q K^T entries.
EpochSummary summarize_epochs(const mem::MemoryHierarchy& h,
                              std::span<const std::uint64_t> qk_first_computed);

}  // namespace iolab::attn
