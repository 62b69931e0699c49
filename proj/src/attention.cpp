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

#include "iolab/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iolab/errors.hpp"

namespace iolab::attn {

using mem::MemoryHierarchy;
using mem::Op;
using mem::Slot;
using mem::Word;

void AttentionInstance::validate() const {
  const std::size_t rows = q.rows();
  const std::size_t cols = q.cols();
  if (rows == 0 || cols == 0) throw ConfigError("attention needs N >= 1 and d >= 1");
  for (const DenseMatrix* m : {&k, &v}) {
    if (m->rows() != rows || m->cols() != cols) {
      throw ConfigError("Q, K, V must all be " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
  }
}

AttentionInstance AttentionInstance::random(std::size_t n, std::size_t d,
                                            double magnitude,
                                            std::mt19937_64& rng) {
  AttentionInstance inst;
  inst.q = DenseMatrix::uniform(n, d, magnitude, rng);
  inst.k = DenseMatrix::uniform(n, d, magnitude, rng);
  inst.v = DenseMatrix::uniform(n, d, magnitude, rng);
  return inst;
}

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::SquareTiling: return "tiling";
    case Algorithm::Streaming: return "streaming";
  }
  return "?";
}

namespace {

DenseMatrix attention_from_scores(const AttentionInstance& inst,
                                  const DenseMatrix& scores, bool subtract_max) {
  const std::size_t n = inst.n();
  const std::size_t d = inst.d();
  DenseMatrix out(n, d);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    double shift = 0.0;
    if (subtract_max) {
      shift = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) shift = std::max(shift, scores(i, j));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = std::exp(scores(i, j) - shift);
      sum += weights[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < d; ++c) out(i, c) += weights[j] * inst.v(j, c);
    }
    for (std::size_t c = 0; c < d; ++c) out(i, c) /= sum;
  }
  return out;
}

bool all_finite(const DenseMatrix& m) {
  return std::all_of(m.data().begin(), m.data().end(),
                     [](double x) { return std::isfinite(x); });
}

void require_real_mode(const MemoryHierarchy& h) {
  if (h.value_kind().is_field()) {
    throw ConfigError("attention kernels run in real (float) mode only");
  }
}

void place_inputs(MemoryHierarchy& h, const AttentionInstance& inst,
                  const AttentionLayout& layout) {
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t l = 0; l < inst.d(); ++l) {
      h.store_input(layout.q(i, l), Word::real(inst.q(i, l)));
      h.store_input(layout.k(i, l), Word::real(inst.k(i, l)));
      h.store_input(layout.v(i, l), Word::real(inst.v(i, l)));
    }
  }
}

DenseMatrix collect_output(const MemoryHierarchy& h, const AttentionLayout& layout) {
  DenseMatrix out(layout.n, layout.d);
  for (std::size_t i = 0; i < layout.n; ++i) {
    for (std::size_t c = 0; c < layout.d; ++c) {
      const auto w = h.peek_memory(layout.o(i, c));
      if (!w) throw UsageError("kernel left output entry unwritten");
      out(i, c) = w->as_real();
    }
  }
  return out;
}

// Cache-resident copy of a sub-block, row-major over the extent.
struct ResidentBlock {
  BlockExtent extent;
  std::vector<Slot> slots;

  Slot at(std::size_t r, std::size_t c) const {
    return slots[(r - extent.row_begin) * extent.cols() + (c - extent.col_begin)];
  }
};

template <typename AddressOf>
ResidentBlock read_block(MemoryHierarchy& h, BlockExtent extent, AddressOf addr) {
  ResidentBlock b{extent, {}};
  b.slots.reserve(extent.rows() * extent.cols());
  for (std::size_t r = extent.row_begin; r < extent.row_end; ++r) {
    for (std::size_t c = extent.col_begin; c < extent.col_end; ++c) {
      b.slots.push_back(h.read_word(addr(r, c)));
    }
  }
  return b;
}

ResidentBlock zero_block(MemoryHierarchy& h, BlockExtent extent) {
  ResidentBlock b{extent, {}};
  b.slots.reserve(extent.rows() * extent.cols());
  for (std::size_t i = 0; i < extent.rows() * extent.cols(); ++i) {
    b.slots.push_back(h.zero());
  }
  return b;
}

// acc[r, c] += sum over t of lhs[r, t] * rhs[t, c]; lhs is indexed
// (row, inner), rhs_at(t, c) returns the slot for inner index t.
template <typename RhsAt>
void accumulate_product(MemoryHierarchy& h, ResidentBlock& acc,
                        const ResidentBlock& lhs, RhsAt rhs_at) {
  for (std::size_t r = acc.extent.row_begin; r < acc.extent.row_end; ++r) {
    for (std::size_t c = acc.extent.col_begin; c < acc.extent.col_end; ++c) {
      const Slot target = acc.at(r, c);
      for (std::size_t t = lhs.extent.col_begin; t < lhs.extent.col_end; ++t) {
        h.compute_into(target, Op::MulAdd, {target, lhs.at(r, t), rhs_at(t, c)});
      }
    }
  }
}

void note_first(std::vector<std::uint64_t>& first, std::size_t index,
                std::uint64_t io_now, bool& is_first) {
  is_first = first[index] == kNotComputed;
  if (is_first) first[index] = io_now;
}

// Computes the (i, j) score block of Q K^T into `scores`, reading Q and K
// blocks of width B along d. Lines 6-10 of the tiling loop.
void compute_score_block(MemoryHierarchy& h, const AttentionInstance& inst,
                         const AttentionLayout& layout, std::size_t b,
                         std::size_t bi, std::size_t bj, ResidentBlock& scores) {
  const std::size_t n = inst.n();
  const std::size_t d = inst.d();
  for (std::size_t bl = 0; bl < ceil_div(d, b); ++bl) {
    const BlockExtent q_ext = block_extent(n, d, b, bi, bl);
    // K^T block (l, j) is the K block (j, l) read column-major: we keep it
    // indexed as (j, l) and look it up transposed.
    const BlockExtent k_ext = block_extent(n, d, b, bj, bl);
    ResidentBlock qb = read_block(h, q_ext, [&](std::size_t r, std::size_t c) {
      return layout.q(r, c);
    });
    ResidentBlock kb = read_block(h, k_ext, [&](std::size_t r, std::size_t c) {
      return layout.k(r, c);
    });
    accumulate_product(h, scores, qb, [&](std::size_t t, std::size_t c) {
      return kb.at(c, t);
    });
    h.free_slots(qb.slots);
    h.free_slots(kb.slots);
  }
}

}  // namespace

DenseMatrix reference_attention(const AttentionInstance& inst) {
  inst.validate();
  const DenseMatrix scores = matmul(inst.q, inst.k.transpose());
  DenseMatrix out = attention_from_scores(inst, scores, false);
  if (all_finite(out)) return out;
  return attention_from_scores(inst, scores, true);
}

DenseMatrix reference_attention_stabilized(const AttentionInstance& inst) {
  inst.validate();
  return attention_from_scores(inst, matmul(inst.q, inst.k.transpose()), true);
}

std::size_t tiling_block_size(std::size_t m) {
  std::size_t b = 0;
  while (4 * (b + 1) * (b + 1) <= m) ++b;
  return b;
}

KernelResult square_tiling_attention(MemoryHierarchy& h,
                                     const AttentionInstance& inst,
                                     TilingOptions options) {
  inst.validate();
  require_real_mode(h);
  const std::size_t n = inst.n();
  const std::size_t d = inst.d();
  const std::size_t b = tiling_block_size(h.capacity());
  if (b == 0) throw RegimeError("square tiling needs M >= 4");
  if (options.row_max_prepass && 3 * b * b + 2 * b > h.capacity()) {
    throw RegimeError("row-max prepass needs 3B^2 + 2B <= M (B=" +
                      std::to_string(b) + ", M=" + std::to_string(h.capacity()) +
                      ")");
  }
  const AttentionLayout layout{n, d};
  place_inputs(h, inst, layout);

  const std::size_t row_blocks = ceil_div(n, b);
  const std::size_t d_blocks = ceil_div(d, b);
  std::vector<std::uint64_t> first(n * n, kNotComputed);

  auto on_scores_complete = [&](const ResidentBlock& scores) {
    for (std::size_t r = scores.extent.row_begin; r < scores.extent.row_end; ++r) {
      for (std::size_t c = scores.extent.col_begin; c < scores.extent.col_end; ++c) {
        bool is_first = false;
        note_first(first, r * n + c, h.io_count(), is_first);
        if (is_first && options.write_qk_entries) {
          h.write_word(scores.at(r, c), layout.qk(r, c));
        }
      }
    }
  };

  if (options.row_max_prepass) {
    for (std::size_t bi = 0; bi < row_blocks; ++bi) {
      const BlockExtent rows = block_extent(n, 1, b, bi, 0);
      std::vector<Slot> maxes;
      for (std::size_t r = 0; r < rows.rows(); ++r) {
        maxes.push_back(h.constant(Word::real(-std::numeric_limits<double>::infinity())));
      }
      for (std::size_t bj = 0; bj < row_blocks; ++bj) {
        ResidentBlock scores = zero_block(h, block_extent(n, n, b, bi, bj));
        compute_score_block(h, inst, layout, b, bi, bj, scores);
        on_scores_complete(scores);
        for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
          const Slot m = maxes[r - rows.row_begin];
          for (std::size_t c = scores.extent.col_begin; c < scores.extent.col_end; ++c) {
            h.compute_into(m, Op::Max, {m, scores.at(r, c)});
          }
        }
        h.free_slots(scores.slots);
      }
      for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
        h.write_word(maxes[r - rows.row_begin], layout.row_max(r));
      }
      h.free_slots(maxes);
    }
  }

  // Phase 1: A = exp(Q K^T) block by block, row sums d.
  for (std::size_t bi = 0; bi < row_blocks; ++bi) {
    const BlockExtent rows = block_extent(n, 1, b, bi, 0);
    std::vector<Slot> sums;
    for (std::size_t r = 0; r < rows.rows(); ++r) sums.push_back(h.zero());
    std::vector<Slot> maxes;
    if (options.row_max_prepass) {
      for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
        maxes.push_back(h.read_word(layout.row_max(r)));
      }
    }
    for (std::size_t bj = 0; bj < row_blocks; ++bj) {
      ResidentBlock a_block = zero_block(h, block_extent(n, n, b, bi, bj));
      compute_score_block(h, inst, layout, b, bi, bj, a_block);
      on_scores_complete(a_block);
      for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
        for (std::size_t c = a_block.extent.col_begin; c < a_block.extent.col_end; ++c) {
          const Slot s = a_block.at(r, c);
          if (options.row_max_prepass) {
            h.compute_into(s, Op::Sub, {s, maxes[r - rows.row_begin]});
          }
          h.compute_into(s, Op::Exp, {s});
          h.write_word(s, layout.a(r, c));
        }
      }
      for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
        const Slot sum = sums[r - rows.row_begin];
        for (std::size_t c = a_block.extent.col_begin; c < a_block.extent.col_end; ++c) {
          h.compute_into(sum, Op::Add, {sum, a_block.at(r, c)});
        }
      }
      h.free_slots(a_block.slots);
    }
    for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
      h.write_word(sums[r - rows.row_begin], layout.row_sum(r));
    }
    h.free_slots(sums);
    h.free_slots(maxes);
  }

  // Phase 2: O = D^-1 A V.
  for (std::size_t bi = 0; bi < row_blocks; ++bi) {
    const BlockExtent rows = block_extent(n, 1, b, bi, 0);
    std::vector<Slot> inv;
    for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
      const Slot s = h.read_word(layout.row_sum(r));
      h.compute_into(s, Op::Reciprocal, {s});
      inv.push_back(s);
    }
    for (std::size_t bj = 0; bj < d_blocks; ++bj) {
      ResidentBlock o_block = zero_block(h, block_extent(n, d, b, bi, bj));
      for (std::size_t bk = 0; bk < row_blocks; ++bk) {
        ResidentBlock a_block = read_block(
            h, block_extent(n, n, b, bi, bk),
            [&](std::size_t r, std::size_t c) { return layout.a(r, c); });
        ResidentBlock v_block = read_block(
            h, block_extent(n, d, b, bk, bj),
            [&](std::size_t r, std::size_t c) { return layout.v(r, c); });
        for (std::size_t r = rows.row_begin; r < rows.row_end; ++r) {
          for (std::size_t t = a_block.extent.col_begin; t < a_block.extent.col_end; ++t) {
            const Slot s = a_block.at(r, t);
            h.compute_into(s, Op::Mul, {s, inv[r - rows.row_begin]});
          }
        }
        accumulate_product(h, o_block, a_block, [&](std::size_t t, std::size_t c) {
          return v_block.at(t, c);
        });
        h.free_slots(a_block.slots);
        h.free_slots(v_block.slots);
      }
      for (std::size_t r = o_block.extent.row_begin; r < o_block.extent.row_end; ++r) {
        for (std::size_t c = o_block.extent.col_begin; c < o_block.extent.col_end; ++c) {
          h.write_word(o_block.at(r, c), layout.o(r, c));
        }
      }
      h.free_slots(o_block.slots);
    }
    h.free_slots(inv);
  }

  KernelResult result;
  result.algorithm = Algorithm::SquareTiling;
  result.output = collect_output(h, layout);
  result.io = h.io();
  result.block_size = b;
  result.qk_first_computed = std::move(first);
  result.epochs = summarize_epochs(h, result.qk_first_computed);
  result.overflowed = h.overflowed();
  return result;
}

std::size_t streaming_footprint(std::size_t rows, std::size_t d) {
  return 2 * rows * d + 2 * rows + 2 * d + 2;
}

std::size_t streaming_block_rows(std::size_t m, std::size_t d) {
  if (d == 0) throw ConfigError("d must be positive");
  if (m < 8 * d) {
    throw RegimeError("streaming attention needs M >= 8d (M=" + std::to_string(m) +
                      ", d=" + std::to_string(d) +
                      "); use square tiling for this cache size");
  }
  std::size_t rows = m / (4 * d);
  while (rows > 1 && streaming_footprint(rows, d) > m) --rows;
  return rows;
}

KernelResult streaming_attention(MemoryHierarchy& h,
                                 const AttentionInstance& inst) {
  inst.validate();
  require_real_mode(h);
  const std::size_t n = inst.n();
  const std::size_t d = inst.d();
  const std::size_t block_rows = streaming_block_rows(h.capacity(), d);
  const AttentionLayout layout{n, d};
  place_inputs(h, inst, layout);

  std::vector<std::uint64_t> first(n * n, kNotComputed);
  const Word neg_inf = Word::real(-std::numeric_limits<double>::infinity());

  for (std::size_t r0 = 0; r0 < n; r0 += block_rows) {
    const std::size_t r1 = std::min(n, r0 + block_rows);
    const std::size_t rows = r1 - r0;
    ResidentBlock qb = read_block(h, BlockExtent{r0, r1, 0, d},
                                  [&](std::size_t r, std::size_t c) {
                                    return layout.q(r, c);
                                  });
    ResidentBlock acc = zero_block(h, BlockExtent{r0, r1, 0, d});
    std::vector<Slot> row_sum;
    std::vector<Slot> row_max;
    for (std::size_t r = 0; r < rows; ++r) {
      row_sum.push_back(h.zero());
      row_max.push_back(h.constant(neg_inf));
    }

    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Slot> k_row;
      std::vector<Slot> v_row;
      for (std::size_t l = 0; l < d; ++l) k_row.push_back(h.read_word(layout.k(j, l)));
      for (std::size_t c = 0; c < d; ++c) v_row.push_back(h.read_word(layout.v(j, c)));

      for (std::size_t r = r0; r < r1; ++r) {
        const std::size_t local = r - r0;
        const Slot score = h.zero();
        for (std::size_t l = 0; l < d; ++l) {
          h.compute_into(score, Op::MulAdd, {score, qb.at(r, l), k_row[l]});
        }
        bool is_first = false;
        note_first(first, r * n + j, h.io_count(), is_first);

        // Online softmax: rescale everything by exp(m_old - m_new).
        const Slot new_max = h.compute(Op::Max, {row_max[local], score});
        const Slot scale = row_max[local];
        h.compute_into(scale, Op::Sub, {scale, new_max});
        h.compute_into(scale, Op::Exp, {scale});
        h.compute_into(score, Op::Sub, {score, new_max});
        h.compute_into(score, Op::Exp, {score});
        h.compute_into(row_sum[local], Op::Mul, {row_sum[local], scale});
        h.compute_into(row_sum[local], Op::Add, {row_sum[local], score});
        for (std::size_t c = 0; c < d; ++c) {
          const Slot a = acc.at(r, c);
          h.compute_into(a, Op::Mul, {a, scale});
          h.compute_into(a, Op::MulAdd, {a, score, v_row[c]});
        }
        h.free_slot(scale);
        h.free_slot(score);
        row_max[local] = new_max;
      }
      h.free_slots(k_row);
      h.free_slots(v_row);
    }

    for (std::size_t r = r0; r < r1; ++r) {
      const Slot inv = row_sum[r - r0];
      h.compute_into(inv, Op::Reciprocal, {inv});
      for (std::size_t c = 0; c < d; ++c) {
        const Slot a = acc.at(r, c);
        h.compute_into(a, Op::Mul, {a, inv});
        h.write_word(a, layout.o(r, c));
      }
    }
    h.free_slots(qb.slots);
    h.free_slots(acc.slots);
    h.free_slots(row_sum);
    h.free_slots(row_max);
  }

  KernelResult result;
  result.algorithm = Algorithm::Streaming;
  result.output = collect_output(h, layout);
  result.io = h.io();
  result.block_size = block_rows;
  result.qk_first_computed = std::move(first);
  result.epochs = summarize_epochs(h, result.qk_first_computed);
  result.overflowed = h.overflowed();
  return result;
}

Algorithm select_algorithm(std::size_t m, std::size_t d) {
  return (m >= d * d && m >= 8 * d) ? Algorithm::Streaming
                                    : Algorithm::SquareTiling;
}

KernelResult dispatch_attention(MemoryHierarchy& h, const AttentionInstance& inst) {
  inst.validate();
  return select_algorithm(h.capacity(), inst.d()) == Algorithm::Streaming
             ? streaming_attention(h, inst)
             : square_tiling_attention(h, inst);
}

MatmulResult matmul_via_attention(MemoryHierarchy& h, const DenseMatrix& q,
                                  const DenseMatrix& k) {
  AttentionInstance inst{q, k, DenseMatrix(q.rows(), q.cols(), 1.0)};
  inst.validate();
  TilingOptions options;
  options.write_qk_entries = true;
  MatmulResult out;
  out.run = square_tiling_attention(h, inst, options);
  const AttentionLayout layout{inst.n(), inst.d()};
  out.product = DenseMatrix(inst.n(), inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) {
    for (std::size_t j = 0; j < inst.n(); ++j) {
      out.product(i, j) = h.peek_memory(layout.qk(i, j))->as_real();
    }
  }
  return out;
}

EpochSummary summarize_epochs(const MemoryHierarchy& h,
                              std::span<const std::uint64_t> qk_first_computed) {
  const std::size_t m = h.capacity();
  const auto epochs = mem::split_into_epochs(h.trace(), m);
  EpochSummary s;
  s.epochs = epochs.size();
  for (const auto& e : epochs) s.max_io_per_epoch = std::max(s.max_io_per_epoch, e.io_count());
  std::vector<std::size_t> per_epoch(epochs.size(), 0);
  for (std::uint64_t t : qk_first_computed) {
    if (t == kNotComputed) continue;
    ++per_epoch[mem::epoch_of(t, m, epochs.size())];
  }
  for (std::size_t c : per_epoch) {
    s.max_entries_per_epoch = std::max(s.max_entries_per_epoch, c);
  }
  return s;
}

}  // namespace iolab::attn
