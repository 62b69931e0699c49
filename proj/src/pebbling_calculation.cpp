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

#include "iolab/errors.hpp"
#include "iolab/pebbling.hpp"

namespace iolab::pebble {

CalculationReport validate_calculation(const Dag& dag, std::size_t m,
                                       const Calculation& calc) {
  CalculationReport report;
  std::vector<char> red(dag.size(), 0);
  std::vector<char> blue(dag.size(), 0);
  for (NodeId v : dag.inputs()) blue[v] = 1;
  std::size_t red_count = 0;

  auto fail = [&](std::size_t index, const Transition& t, std::string reason) {
    report.valid = false;
    report.violation = CalculationViolation{index, t.rule, t.vertex, std::move(reason)};
    return report;
  };

  for (std::size_t i = 0; i < calc.size(); ++i) {
    const Transition& t = calc[i];
    if (t.vertex >= dag.size()) return fail(i, t, "vertex does not exist");
    const NodeId v = t.vertex;
    switch (t.rule) {
      case Rule::R1:
        if (!blue[v]) return fail(i, t, "R1 needs a blue pebble on the vertex");
        if (red[v]) return fail(i, t, "vertex already has a red pebble");
        if (red_count + 1 > m) return fail(i, t, "red pebble limit M exceeded");
        red[v] = 1;
        ++red_count;
        ++report.io.reads;
        break;
      case Rule::R2:
        if (!red[v]) return fail(i, t, "R2 needs a red pebble on the vertex");
        if (blue[v]) return fail(i, t, "vertex already has a blue pebble");
        blue[v] = 1;
        ++report.io.writes;
        break;
      case Rule::R3: {
        if (dag.is_input(v)) return fail(i, t, "R3 cannot place a pebble on an input");
        if (red[v]) return fail(i, t, "vertex already has a red pebble");
        for (NodeId p : dag.node(v).parents) {
          if (!red[p]) {
            return fail(i, t, "parent " + std::to_string(p) + " has no red pebble");
          }
        }
        if (red_count + 1 > m) return fail(i, t, "red pebble limit M exceeded");
        red[v] = 1;
        ++red_count;
        break;
      }
      case Rule::R4: {
        const bool take_red =
            t.pebble == Pebble::Red || (t.pebble == Pebble::Auto && red[v]);
        if (take_red) {
          if (!red[v]) return fail(i, t, "no red pebble to remove");
          red[v] = 0;
          --red_count;
        } else {
          if (!blue[v]) return fail(i, t, "no pebble to remove");
          blue[v] = 0;
        }
        break;
      }
    }
    report.peak_red = std::max(report.peak_red, red_count);
  }

  const Transition end{Rule::R4, 0, Pebble::Auto};
  for (NodeId v : dag.outputs()) {
    if (!blue[v]) {
      Transition t = end;
      t.vertex = v;
      return fail(calc.size(), t, "output vertex lacks a blue pebble at the end");
    }
  }
  if (red_count != 0) {
    Transition t = end;
    t.vertex = static_cast<NodeId>(std::find(red.begin(), red.end(), 1) - red.begin());
    return fail(calc.size(), t, "red pebbles remain at the end");
  }
  report.valid = true;
  return report;
}

namespace {

// Emits transitions while tracking the red set and its peak size.
class Pebbler {
 public:
  explicit Pebbler(std::size_t nodes) : red_(nodes, 0) {}

  void read(NodeId v) { place(Rule::R1, v); }
  void compute(NodeId v) { place(Rule::R3, v); }
  void write(NodeId v) { calc_.push_back({Rule::R2, v, Pebble::Auto}); }
  void drop(NodeId v) {
    calc_.push_back({Rule::R4, v, Pebble::Red});
    red_[v] = 0;
    --count_;
  }
  bool is_red(NodeId v) const { return red_[v] != 0; }

  std::size_t peak() const { return peak_; }
  Calculation take() { return std::move(calc_); }

 private:
  void place(Rule rule, NodeId v) {
    calc_.push_back({rule, v, Pebble::Auto});
    red_[v] = 1;
    peak_ = std::max(peak_, ++count_);
  }

  std::vector<char> red_;
  std::size_t count_ = 0;
  std::size_t peak_ = 0;
  Calculation calc_;
};

// Eagerly performs every post-order addition whose operands are red. Leaves
// must arrive in order.
struct TreeFolder {
  const SummationTree* tree = nullptr;
  std::size_t next_step = 0;

  void fold(Pebbler& p) {
    while (next_step < tree->steps.size()) {
      const auto& s = tree->steps[next_step];
      if (!p.is_red(s.left) || !p.is_red(s.right)) break;
      p.compute(s.node);
      p.drop(s.left);
      p.drop(s.right);
      ++next_step;
    }
  }

  // Computes the root from the completed top and drops the top.
  void finish(Pebbler& p) const {
    p.compute(tree->root);
    p.drop(tree->top);
  }
};

Calculation emit_schedule(const AttentionDag& a, std::size_t block_rows,
                          std::size_t* peak) {
  const std::size_t n = a.n;
  const std::size_t d = a.d;
  Pebbler p(a.graph.size());

  for (std::size_t r0 = 0; r0 < n; r0 += block_rows) {
    const std::size_t r1 = std::min(n, r0 + block_rows);
    for (std::size_t i = r0; i < r1; ++i) {
      for (std::size_t l = 0; l < d; ++l) p.read(a.q(i, l));
    }
    std::vector<TreeFolder> row_sum(r1 - r0);
    std::vector<TreeFolder> av((r1 - r0) * d);
    for (std::size_t i = r0; i < r1; ++i) {
      row_sum[i - r0].tree = &a.row_sum_trees[i];
      for (std::size_t c = 0; c < d; ++c) av[(i - r0) * d + c].tree = &a.av(i, c);
    }

    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t l = 0; l < d; ++l) p.read(a.k(j, l));
      for (std::size_t i = r0; i < r1; ++i) {
        TreeFolder qk{&a.qk(i, j), 0};
        for (NodeId leaf : qk.tree->leaves) {
          p.compute(leaf);
          qk.fold(p);
        }
        qk.finish(p);
        p.compute(a.exp(i, j));
        p.drop(qk.tree->root);
      }
      for (std::size_t l = 0; l < d; ++l) p.drop(a.k(j, l));

      for (std::size_t c = 0; c < d; ++c) p.read(a.v(j, c));
      for (std::size_t i = r0; i < r1; ++i) {
        for (std::size_t c = 0; c < d; ++c) {
          p.compute(a.l2(i, j, c));
          av[(i - r0) * d + c].fold(p);
        }
        row_sum[i - r0].fold(p);
      }
      for (std::size_t c = 0; c < d; ++c) p.drop(a.v(j, c));
    }

    for (std::size_t i = r0; i < r1; ++i) {
      row_sum[i - r0].finish(p);
      p.compute(a.inverses[i]);
      p.drop(a.row_sum_trees[i].root);
      for (std::size_t c = 0; c < d; ++c) {
        const TreeFolder& t = av[(i - r0) * d + c];
        t.finish(p);
        p.compute(a.scale(i, c));
        p.drop(t.tree->root);
        p.write(a.scale(i, c));
        p.drop(a.scale(i, c));
      }
      p.drop(a.inverses[i]);
      for (std::size_t l = 0; l < d; ++l) p.drop(a.q(i, l));
    }
  }
  if (peak) *peak = p.peak();
  return p.take();
}

}  // namespace

std::size_t schedule_peak_red(const AttentionDag& dag, std::size_t block_rows) {
  if (block_rows == 0) throw ConfigError("block_rows must be positive");
  std::size_t peak = 0;
  emit_schedule(dag, block_rows, &peak);
  return peak;
}

PebblingSchedule blocked_pebbling_schedule(const AttentionDag& dag, std::size_t m) {
  const std::size_t single = schedule_peak_red(dag, 1);
  if (single > m) {
    throw RegimeError("blocked schedule needs M >= " + std::to_string(single) +
                      " red pebbles for one resident row (N=" + std::to_string(dag.n) +
                      ", d=" + std::to_string(dag.d) + "), got M=" + std::to_string(m));
  }
  // Peak red count grows with the block, so binary search the largest fit.
  std::size_t lo = 1;
  std::size_t hi = std::min(dag.n, std::max<std::size_t>(1, m / dag.d));
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (schedule_peak_red(dag, mid) <= m) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  PebblingSchedule s;
  s.block_rows = lo;
  s.calculation = emit_schedule(dag, lo, &s.peak_red);
  return s;
}

}  // namespace iolab::pebble
