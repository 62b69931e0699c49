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

#include <array>
#include <istream>
#include <ostream>

#include "iolab/errors.hpp"
#include "iolab/pebbling.hpp"
#include "json.hpp"

namespace iolab::pebble {

namespace {

constexpr std::array<const char*, kNodeKindCount> kKindNames = {
    "Input",          "L1Product",  "SumInternal", "QKtRoot",
    "Exp",            "RowSumInternal", "RowSumRoot", "Inverse",
    "L2Product",      "AVSumInternal",  "AVRoot",     "Scale",
    "Generic",
};

// Builds a balanced binary tree over leaves[lo, hi) and returns its top.
NodeId build_balanced(Dag& dag, NodeKind internal_kind, bool level1,
                      std::span<const NodeId> leaves,
                      std::vector<SummationTree::Step>& steps) {
  if (leaves.size() == 1) return leaves.front();
  const std::size_t mid = leaves.size() / 2;
  const NodeId left = build_balanced(dag, internal_kind, level1,
                                     leaves.subspan(0, mid), steps);
  const NodeId right = build_balanced(dag, internal_kind, level1,
                                      leaves.subspan(mid), steps);
  const NodeId node = dag.add_node(internal_kind, {left, right}, level1);
  steps.push_back({node, left, right});
  return node;
}

SummationTree build_tree(Dag& dag, std::vector<NodeId> leaves,
                         NodeKind internal_kind, NodeKind root_kind, bool level1) {
  SummationTree t;
  t.leaves = std::move(leaves);
  t.top = build_balanced(dag, internal_kind, level1, t.leaves, t.steps);
  t.root = dag.add_node(root_kind, {t.top}, level1);
  return t;
}

}  // namespace

const char* kind_name(NodeKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

NodeKind kind_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) return static_cast<NodeKind>(i);
  }
  throw ConfigError("unknown node kind '" + name + "'");
}

NodeId Dag::add_node(NodeKind kind, std::vector<NodeId> parents, bool level1) {
  const auto id = static_cast<NodeId>(nodes_.size());
  for (NodeId p : parents) {
    if (p >= id) {
      throw ConfigError("parent " + std::to_string(p) + " of node " +
                        std::to_string(id) + " is not an earlier node");
    }
  }
  for (NodeId p : parents) children_[p].push_back(id);
  nodes_.push_back(Node{kind, std::move(parents), level1});
  children_.emplace_back();
  return id;
}

std::vector<NodeId> Dag::inputs() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v) {
    if (is_input(v)) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> Dag::outputs() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v) {
    if (is_output(v)) out.push_back(v);
  }
  return out;
}

std::size_t Dag::count(NodeKind kind) const {
  std::size_t c = 0;
  for (const Node& n : nodes_) c += n.kind == kind;
  return c;
}

AttentionDag build_attention_dag(std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw ConfigError("attention DAG needs N >= 1 and d >= 1");
  AttentionDag a;
  a.n = n;
  a.d = d;
  Dag& g = a.graph;

  for (std::size_t i = 0; i < n * d; ++i) a.q_inputs.push_back(g.add_node(NodeKind::Input, {}));
  for (std::size_t i = 0; i < n * d; ++i) a.k_inputs.push_back(g.add_node(NodeKind::Input, {}));
  for (std::size_t i = 0; i < n * d; ++i) a.v_inputs.push_back(g.add_node(NodeKind::Input, {}));

  a.qk_trees.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<NodeId> leaves;
      for (std::size_t l = 0; l < d; ++l) {
        leaves.push_back(g.add_node(NodeKind::L1Product, {a.q(i, l), a.k(j, l)}, true));
      }
      a.qk_trees.push_back(build_tree(g, std::move(leaves), NodeKind::SumInternal,
                                      NodeKind::QKtRoot, true));
    }
  }

  for (std::size_t e = 0; e < n * n; ++e) {
    a.exps.push_back(g.add_node(NodeKind::Exp, {a.qk_trees[e].root}));
  }

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<NodeId> leaves(a.exps.begin() + static_cast<std::ptrdiff_t>(i * n),
                               a.exps.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    a.row_sum_trees.push_back(build_tree(g, std::move(leaves), NodeKind::RowSumInternal,
                                         NodeKind::RowSumRoot, false));
    a.inverses.push_back(g.add_node(NodeKind::Inverse, {a.row_sum_trees.back().root}));
  }

  a.l2_products.reserve(n * n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t c = 0; c < d; ++c) {
        a.l2_products.push_back(g.add_node(NodeKind::L2Product, {a.exp(i, k), a.v(k, c)}));
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      std::vector<NodeId> leaves;
      for (std::size_t k = 0; k < n; ++k) leaves.push_back(a.l2(i, k, c));
      a.av_trees.push_back(build_tree(g, std::move(leaves), NodeKind::AVSumInternal,
                                      NodeKind::AVRoot, false));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      a.scales.push_back(g.add_node(NodeKind::Scale, {a.inverses[i], a.av(i, c).root}));
    }
  }
  return a;
}

void write_dag_jsonl(std::ostream& out, const Dag& dag) {
  for (NodeId v = 0; v < dag.size(); ++v) {
    const Node& node = dag.node(v);
    nlohmann::json j = {{"id", v},
                        {"kind", kind_name(node.kind)},
                        {"parents", node.parents},
                        {"level1", node.level1}};
    out << j.dump() << '\n';
  }
}

Dag read_dag_jsonl(std::istream& in) {
  Dag dag;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto id = j.at("id").get<NodeId>();
      if (id != dag.size()) {
        throw ConfigError("node ids must be consecutive from 0; expected " +
                          std::to_string(dag.size()) + ", got " + std::to_string(id));
      }
      dag.add_node(kind_from_name(j.at("kind").get<std::string>()),
                   j.at("parents").get<std::vector<NodeId>>(),
                   j.value("level1", false));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("DAG line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return dag;
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::R1: return "R1";
    case Rule::R2: return "R2";
    case Rule::R3: return "R3";
    case Rule::R4: return "R4";
  }
  return "?";
}

void write_calculation_json(std::ostream& out, const Calculation& calc) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Transition& t : calc) {
    nlohmann::json j = {{"rule", rule_name(t.rule)}, {"vertex", t.vertex}};
    if (t.pebble == Pebble::Red) j["pebble"] = "red";
    if (t.pebble == Pebble::Blue) j["pebble"] = "blue";
    arr.push_back(std::move(j));
  }
  out << arr.dump() << '\n';
}

Calculation read_calculation_json(std::istream& in) {
  Calculation calc;
  try {
    const auto arr = nlohmann::json::parse(in);
    for (const auto& j : arr) {
      Transition t;
      const auto rule = j.at("rule").get<std::string>();
      if (rule == "R1") {
        t.rule = Rule::R1;
      } else if (rule == "R2") {
        t.rule = Rule::R2;
      } else if (rule == "R3") {
        t.rule = Rule::R3;
      } else if (rule == "R4") {
        t.rule = Rule::R4;
      } else {
        throw ConfigError("unknown rule '" + rule + "'");
      }
      t.vertex = j.at("vertex").get<NodeId>();
      const auto pebble = j.value("pebble", std::string("auto"));
      if (pebble == "red") {
        t.pebble = Pebble::Red;
      } else if (pebble == "blue") {
        t.pebble = Pebble::Blue;
      } else if (pebble != "auto") {
        throw ConfigError("unknown pebble '" + pebble + "'");
      }
      calc.push_back(t);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("calculation JSON: ") + e.what());
  }
  return calc;
}

}  // namespace iolab::pebble
