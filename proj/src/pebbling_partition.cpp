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
#include <deque>
#include <functional>
#include <map>

#include "iolab/errors.hpp"
#include "iolab/pebbling.hpp"

namespace iolab::pebble {

const char* property_name(PartitionProperty p) {
  switch (p) {
    case PartitionProperty::P1: return "P1";
    case PartitionProperty::P2: return "P2";
    case PartitionProperty::P3: return "P3";
    case PartitionProperty::P4: return "P4";
  }
  return "?";
}

bool PartitionReport::has(PartitionProperty p) const {
  return std::any_of(violations.begin(), violations.end(),
                     [p](const PartitionViolation& v) { return v.property == p; });
}

std::vector<NodeId> minimum_set(const Dag& dag, std::span<const NodeId> part) {
  std::vector<char> in_part(dag.size(), 0);
  for (NodeId v : part) in_part[v] = 1;
  std::vector<NodeId> out;
  for (NodeId v : part) {
    const auto ch = dag.children(v);
    if (std::none_of(ch.begin(), ch.end(), [&](NodeId c) { return in_part[c]; })) {
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t level1_vertex_count(const Dag& dag, std::span<const NodeId> part) {
  std::vector<char> seen(dag.size(), 0);
  std::size_t count = 0;
  for (NodeId v : part) {
    if (v < dag.size() && !seen[v] && dag.node(v).level1) ++count;
    if (v < dag.size()) seen[v] = 1;
  }
  return count;
}

namespace {

// Shortest path from any input to a vertex of `targets` that avoids
// `blocked` entirely; empty when none exists.
std::vector<NodeId> undominated_path(const Dag& dag, const std::vector<char>& blocked,
                                     const std::vector<char>& targets) {
  constexpr NodeId kNone = ~NodeId{0};
  std::vector<NodeId> prev(dag.size(), kNone);
  std::vector<char> seen(dag.size(), 0);
  std::deque<NodeId> queue;
  for (NodeId v : dag.inputs()) {
    if (blocked[v]) continue;
    seen[v] = 1;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    if (targets[v]) {
      std::vector<NodeId> path;
      for (NodeId u = v; u != kNone; u = prev[u]) path.push_back(u);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (NodeId c : dag.children(v)) {
      if (blocked[c] || seen[c]) continue;
      seen[c] = 1;
      prev[c] = v;
      queue.push_back(c);
    }
  }
  return {};
}

}  // namespace

PartitionReport verify_m_partition(const Dag& dag, std::size_t m,
                                   const MPartition& partition) {
  PartitionReport report;
  const std::size_t parts = partition.parts.size();
  constexpr std::size_t kUnassigned = ~std::size_t{0};
  std::vector<std::size_t> owner(dag.size(), kUnassigned);

  // P1
  std::vector<NodeId> overlap;
  for (std::size_t p = 0; p < parts; ++p) {
    for (NodeId v : partition.parts[p].vertices) {
      if (v >= dag.size()) {
        report.violations.push_back({PartitionProperty::P1, p,
                                     "vertex " + std::to_string(v) + " does not exist",
                                     {}, {}, {v}});
        continue;
      }
      if (owner[v] != kUnassigned && owner[v] != p) {
        overlap.push_back(v);
        report.violations.push_back(
            {PartitionProperty::P1, p,
             "vertex " + std::to_string(v) + " is also in part " + std::to_string(owner[v]),
             {}, {}, {v}});
      }
      if (owner[v] == kUnassigned) owner[v] = p;
    }
  }
  std::vector<NodeId> uncovered;
  for (NodeId v = 0; v < dag.size(); ++v) {
    if (owner[v] == kUnassigned) uncovered.push_back(v);
  }
  if (!uncovered.empty()) {
    report.violations.push_back({PartitionProperty::P1, parts,
                                 std::to_string(uncovered.size()) + " vertices are in no part",
                                 {}, {}, uncovered});
  }

  for (std::size_t p = 0; p < parts; ++p) {
    const PartitionPart& part = partition.parts[p];
    std::vector<NodeId> vertices;
    for (NodeId v : part.vertices) {
      if (v < dag.size()) vertices.push_back(v);
    }

    // P2
    std::vector<NodeId> dominator;
    for (NodeId v : part.dominator) {
      if (v < dag.size()) dominator.push_back(v);
    }
    std::sort(dominator.begin(), dominator.end());
    dominator.erase(std::unique(dominator.begin(), dominator.end()), dominator.end());
    if (dominator.size() > m) {
      report.violations.push_back({PartitionProperty::P2, p,
                                   "dominator set has " + std::to_string(dominator.size()) +
                                       " > M vertices",
                                   {}, {}, dominator});
    }
    std::vector<char> blocked(dag.size(), 0);
    for (NodeId v : dominator) blocked[v] = 1;
    std::vector<char> targets(dag.size(), 0);
    for (NodeId v : vertices) targets[v] = 1;
    const auto path = undominated_path(dag, blocked, targets);
    if (!path.empty()) {
      report.violations.push_back({PartitionProperty::P2, p,
                                   "path from input " + std::to_string(path.front()) +
                                       " to part vertex " + std::to_string(path.back()) +
                                       " avoids the dominator set",
                                   path, {}, {}});
    }

    // P3
    auto mins = minimum_set(dag, vertices);
    if (mins.size() > m) {
      report.violations.push_back({PartitionProperty::P3, p,
                                   "minimum set has " + std::to_string(mins.size()) +
                                       " > M vertices",
                                   {}, {}, mins});
    }
    report.minimum_sets.push_back(std::move(mins));
  }

  // P4: part t depends on part s when an edge runs from s into t. Keep one
  // witness edge per ordered pair of parts and look for a cycle.
  std::vector<std::map<std::size_t, std::pair<NodeId, NodeId>>> depends(parts);
  for (NodeId s = 0; s < dag.size(); ++s) {
    if (owner[s] == kUnassigned) continue;
    for (NodeId t : dag.children(s)) {
      if (owner[t] == kUnassigned || owner[t] == owner[s]) continue;
      depends[owner[s]].emplace(owner[t], std::make_pair(s, t));
    }
  }
  std::vector<int> color(parts, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::size_t> stack;
  std::function<bool(std::size_t)> dfs = [&](std::size_t u) {
    color[u] = 1;
    stack.push_back(u);
    for (const auto& [w, edge] : depends[u]) {
      if (color[w] == 1) {
        PartitionViolation v{PartitionProperty::P4, w, "cyclic dependence among parts", {}, {}, {}};
        const auto it = std::find(stack.begin(), stack.end(), w);
        for (auto a = it; a != stack.end(); ++a) {
          const std::size_t from = *a;
          const std::size_t to = (a + 1 == stack.end()) ? w : *(a + 1);
          v.witness_edges.push_back(depends[from].at(to));
        }
        report.violations.push_back(std::move(v));
        return true;
      }
      if (color[w] == 0 && dfs(w)) return true;
    }
    stack.pop_back();
    color[u] = 2;
    return false;
  };
  for (std::size_t u = 0; u < parts; ++u) {
    if (color[u] == 0 && dfs(u)) break;
  }
  return report;
}

std::uint64_t brute_force_min_io(const Dag& dag, std::size_t m) {
  const std::size_t n = dag.size();
  if (n > kMaxSearchNodes) {
    throw EnumerationCapError("configuration search limited to " +
                                  std::to_string(kMaxSearchNodes) + " vertices",
                              n, kMaxSearchNodes);
  }
  std::uint32_t input_mask = 0;
  std::uint32_t output_mask = 0;
  std::vector<std::uint32_t> parent_mask(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (dag.is_input(v)) input_mask |= 1u << v;
    if (dag.is_output(v)) output_mask |= 1u << v;
    for (NodeId p : dag.node(v).parents) parent_mask[v] |= 1u << p;
  }

  // State index: red bits low, blue bits high.
  const auto encode = [n](std::uint32_t red, std::uint32_t blue) {
    return static_cast<std::size_t>(red) | (static_cast<std::size_t>(blue) << n);
  };
  constexpr std::uint16_t kInf = 0xFFFF;
  std::vector<std::uint16_t> dist(std::size_t{1} << (2 * n), kInf);
  std::deque<std::pair<std::uint32_t, std::uint32_t>> queue;
  dist[encode(0, input_mask)] = 0;
  queue.emplace_back(0, input_mask);

  while (!queue.empty()) {
    const auto [red, blue] = queue.front();
    queue.pop_front();
    const std::uint16_t here = dist[encode(red, blue)];
    if ((blue & output_mask) == output_mask) return here;
    const std::size_t reds = static_cast<std::size_t>(__builtin_popcount(red));

    auto relax = [&](std::uint32_t r, std::uint32_t b, std::uint16_t cost) {
      const std::size_t idx = encode(r, b);
      const std::uint16_t nd = static_cast<std::uint16_t>(here + cost);
      if (nd >= dist[idx]) return;
      dist[idx] = nd;
      if (cost == 0) {
        queue.emplace_front(r, b);
      } else {
        queue.emplace_back(r, b);
      }
    };

    for (NodeId v = 0; v < n; ++v) {
      const std::uint32_t bit = 1u << v;
      if (red & bit) {
        relax(red & ~bit, blue, 0);                      // R4 (red)
        if (!(blue & bit)) relax(red, blue | bit, 1);    // R2
        continue;
      }
      if (reds >= m) continue;
      if (blue & bit) relax(red | bit, blue, 1);         // R1
      if (!(input_mask & bit) && (red & parent_mask[v]) == parent_mask[v]) {
        relax(red | bit, blue, 0);                       // R3
      }
    }
  }
  throw RegimeError("no complete calculation exists with M=" + std::to_string(m));
}

}  // namespace iolab::pebble
