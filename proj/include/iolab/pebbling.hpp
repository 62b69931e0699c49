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

// Red-blue pebbling on computation DAGs: the attention DAG builder, a
// calculation validator, a blocked schedule mirroring the streaming kernel,
// an M-partition verifier and exhaustive minimum-I/O search for tiny DAGs.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iolab/memory_hierarchy.hpp"

namespace iolab::pebble {

using NodeId = std::uint32_t;

enum class NodeKind {
  Input,
  L1Product,
  SumInternal,
  QKtRoot,
  Exp,
  RowSumInternal,
  RowSumRoot,
  Inverse,
  L2Product,
  AVSumInternal,
  AVRoot,
  Scale,
  Generic,
};

inline constexpr std::size_t kNodeKindCount = 13;

const char* kind_name(NodeKind k);
NodeKind kind_from_name(const std::string& name);

struct Node {
  NodeKind kind = NodeKind::Generic;
  std::vector<NodeId> parents;
  bool level1 = false;
};

// Directed acyclic graph with topologically ordered ids: every parent id is
// smaller than its child's id. Inputs are the parentless vertices, outputs
// the childless ones.
class Dag {
 public:
  // Throws ConfigError if a parent id is not smaller than the new id.
  NodeId add_node(NodeKind kind, std::vector<NodeId> parents, bool level1 = false);

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::span<const NodeId> children(NodeId id) const { return children_[id]; }

  bool is_input(NodeId id) const { return nodes_[id].parents.empty(); }
  bool is_output(NodeId id) const { return children_[id].empty(); }
  std::vector<NodeId> inputs() const;
  std::vector<NodeId> outputs() const;

  std::size_t count(NodeKind kind) const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> children_;
};

// One summation tree. `steps` lists the internal additions in post-order;
// `top` holds the full sum (the only leaf when there is one leaf) and `root`
// is the separate vertex naming the summed entry.
struct SummationTree {
  struct Step {
    NodeId node;
    NodeId left;
    NodeId right;
  };
  std::vector<NodeId> leaves;
  std::vector<Step> steps;
  NodeId top = 0;
  NodeId root = 0;
};

// The attention computation graph with index maps into its vertices.
struct AttentionDag {
  std::size_t n = 0;
  std::size_t d = 0;
  Dag graph;

  std::vector<NodeId> q_inputs;   // i * d + l
  std::vector<NodeId> k_inputs;   // j * d + l
  std::vector<NodeId> v_inputs;   // j * d + c
  std::vector<SummationTree> qk_trees;   // i * n + j; leaves are L1 products
  std::vector<NodeId> exps;              // i * n + j
  std::vector<SummationTree> row_sum_trees;  // i; leaves are exps
  std::vector<NodeId> inverses;          // i
  std::vector<NodeId> l2_products;       // (i * n + k) * d + c
  std::vector<SummationTree> av_trees;   // i * d + c; leaves are L2 products
  std::vector<NodeId> scales;            // i * d + c, the outputs

  NodeId q(std::size_t i, std::size_t l) const { return q_inputs[i * d + l]; }
  NodeId k(std::size_t j, std::size_t l) const { return k_inputs[j * d + l]; }
  NodeId v(std::size_t j, std::size_t c) const { return v_inputs[j * d + c]; }
  const SummationTree& qk(std::size_t i, std::size_t j) const { return qk_trees[i * n + j]; }
  NodeId exp(std::size_t i, std::size_t j) const { return exps[i * n + j]; }
  NodeId l2(std::size_t i, std::size_t k, std::size_t c) const {
    return l2_products[(i * n + k) * d + c];
  }
  const SummationTree& av(std::size_t i, std::size_t c) const { return av_trees[i * d + c]; }
  NodeId scale(std::size_t i, std::size_t c) const { return scales[i * d + c]; }
};

// Balanced binary summation trees throughout.
AttentionDag build_attention_dag(std::size_t n, std::size_t d);

// ---------------------------------------------------------------------------
// Calculations

enum class Rule { R1, R2, R3, R4 };
// Which pebble an R4 removes. Auto removes the red one if present.
enum class Pebble { Auto, Red, Blue };

const char* rule_name(Rule r);

struct Transition {
  Rule rule = Rule::R1;
  NodeId vertex = 0;
  Pebble pebble = Pebble::Auto;

  friend bool operator==(const Transition&, const Transition&) = default;
};

using Calculation = std::vector<Transition>;

struct CalculationViolation {
  std::size_t index = 0;  // transition index; == size() for a bad end state
  Rule rule = Rule::R1;
  NodeId vertex = 0;
  std::string reason;
};

struct CalculationReport {
  bool valid = false;
  mem::IoStats io;  // reads = R1 count, writes = R2 count
  std::size_t peak_red = 0;
  std::optional<CalculationViolation> violation;
};

// Replays `calc` from the initial configuration (blue pebbles on inputs
// only). The end state must have a blue pebble on every output and no red
// pebbles; leftover blue pebbles elsewhere are tolerated since removing
// them is a free R4.
CalculationReport validate_calculation(const Dag& dag, std::size_t m,
                                       const Calculation& calc);

struct PebblingSchedule {
  Calculation calculation;
  std::size_t block_rows = 0;  // Q rows kept red at once
  std::size_t peak_red = 0;
};

// Complete calculation for the attention DAG in the order of the streaming
// kernel: a block of Q rows stays red while K rows and then V rows stream
// through, each exponentiated score folding at once into the row-sum and
// AV summation trees. The block is the largest row count whose peak red
// count fits in M. Throws RegimeError if a single row does not fit.
PebblingSchedule blocked_pebbling_schedule(const AttentionDag& dag, std::size_t m);

// Peak red count of the schedule for a given block size, without the fit
// check. Exposed for tests and for sizing M.
std::size_t schedule_peak_red(const AttentionDag& dag, std::size_t block_rows);

// ---------------------------------------------------------------------------
// M-partitions

struct PartitionPart {
  std::vector<NodeId> vertices;
  std::vector<NodeId> dominator;
};

struct MPartition {
  std::vector<PartitionPart> parts;
};

enum class PartitionProperty { P1, P2, P3, P4 };

const char* property_name(PartitionProperty p);

struct PartitionViolation {
  PartitionProperty property = PartitionProperty::P1;
  std::size_t part = 0;
  std::string message;
  // P2: an input-to-part path avoiding the dominator set.
  std::vector<NodeId> witness_path;
  // P4: edges (s, t) closing a dependence cycle among parts.
  std::vector<std::pair<NodeId, NodeId>> witness_edges;
  // P1 overlap / uncovered vertices, oversize D or minimum set.
  std::vector<NodeId> witness_set;
};

struct PartitionReport {
  std::vector<PartitionViolation> violations;
  std::vector<std::vector<NodeId>> minimum_sets;  // per part

  bool ok() const { return violations.empty(); }
  bool has(PartitionProperty p) const;
};

// Vertices of `part` with no children inside `part`.
std::vector<NodeId> minimum_set(const Dag& dag, std::span<const NodeId> part);

// Checks P1 (disjoint cover), P2 (|D| <= M and D dominates the part, with
// zero-length paths counted, so inputs in a part must be in its D), P3
// (|minimum set| <= M) and P4 (acyclic part dependence).
PartitionReport verify_m_partition(const Dag& dag, std::size_t m,
                                   const MPartition& partition);

std::size_t level1_vertex_count(const Dag& dag, std::span<const NodeId> part);

// ---------------------------------------------------------------------------
// Exhaustive search

inline constexpr std::size_t kMaxSearchNodes = 12;

// Exact minimum number of R1 + R2 transitions of any complete calculation,
// by 0-1 breadth-first search over (red set, blue set) configurations.
// Throws EnumerationCapError above kMaxSearchNodes vertices and RegimeError
// if no complete calculation exists for this M.
std::uint64_t brute_force_min_io(const Dag& dag, std::size_t m);

// ---------------------------------------------------------------------------
// Serialization

// One JSON object per line: {"id", "kind", "parents", "level1"}.
void write_dag_jsonl(std::ostream& out, const Dag& dag);
Dag read_dag_jsonl(std::istream& in);

// JSON array of {"rule": "R1".."R4", "vertex": id} with optional
// "pebble": "red" | "blue" on R4.
void write_calculation_json(std::ostream& out, const Calculation& calc);
Calculation read_calculation_json(std::istream& in);

}  // namespace iolab::pebble
