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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "iolab/attention.hpp"
#include "iolab/bounds_config.hpp"
#include "iolab/codes.hpp"
#include "iolab/compression.hpp"
#include "iolab/errors.hpp"
#include "iolab/experiments.hpp"
#include "iolab/pebbling.hpp"

namespace {

using namespace iolab;
using attn::Algorithm;
using exp::SweepRecord;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed condition; keeps going so the line lists everything.
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::vector<SweepRecord> sweep(std::size_t n, std::size_t d, std::vector<std::size_t> m,
                               Algorithm a) {
  exp::SweepConfig c;
  c.n = {n};
  c.d = {d};
  c.m = std::move(m);
  c.algorithms = {a};
  c.seed = 20240601;
  return exp::run_sweep(c);
}

std::string fmt(double x, int precision = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << x;
  return s.str();
}

std::vector<SweepRecord> tiling_grid() {
  return sweep(64, 16, {16, 36, 64, 144, 256}, Algorithm::SquareTiling);
}

std::vector<SweepRecord> streaming_grid() {
  return sweep(64, 4, {32, 64, 128, 256, 512}, Algorithm::Streaming);
}

std::vector<SweepRecord> crossover_records() {
  auto t = sweep(32, 8, {64}, Algorithm::SquareTiling);
  auto s = sweep(32, 8, {64}, Algorithm::Streaming);
  t.insert(t.end(), s.begin(), s.end());
  return t;
}

void c1_oracle(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t ns[] = {4, 8, 16, 32, 64};
  const std::size_t ds[] = {2, 4, 8, 16};
  std::mt19937_64 rng(1);
  double worst = 0.0;
  std::size_t runs = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = ns[t % 5];
    const std::size_t d = ds[(t / 5) % 4];
    const auto inst = attn::AttentionInstance::random(n, d, 1.0, rng);
    const auto ref = attn::reference_attention(inst);
    // Tiling anywhere in [4, 4d^2]; streaming anywhere in [8d, 8d + 4d^2].
    const std::size_t mt = 4 + rng() % (4 * d * d);
    const std::size_t ms = 8 * d + rng() % (4 * d * d);
    mem::MemoryHierarchy ht(mt), hs(ms);
    const auto rt = attn::square_tiling_attention(ht, inst);
    const auto rs = attn::streaming_attention(hs, inst);
    worst = std::max({worst, relative_frobenius_error(rt.output, ref),
                      relative_frobenius_error(rs.output, ref)});
    o.require(!rt.overflowed && !rs.overflowed, "overflow");
    runs += 2;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.detail << runs << " kernel runs, worst relative error " << std::scientific << worst
           << std::fixed << ", " << fmt(secs, 2) << " s";
  o.require(worst <= 1e-9, "error above 1e-9");
  o.require(secs < 120.0, "runtime above 2 min");
}

void c2_tiling(Outcome& o) {
  const auto r = tiling_grid();
  for (const auto& x : r) o.require(x.ok(), "run failed: " + x.status);
  const auto fit = exp::fit_scaling_exponent(r, exp::Axis::M);
  o.detail << "slope " << fmt(fit.slope);
  o.require(fit.slope >= -0.6 && fit.slope <= -0.4, "slope outside [-0.6, -0.4]");
  double worst = 0;
  for (const auto& x : r) {
    worst = std::max(worst, static_cast<double>(x.io()) / exp::tiling_formula(x.n, x.d, x.m));
  }
  o.detail << ", max I/O / (N^2 d / sqrt M) = " << fmt(worst);
  o.require(worst <= 16.0, "I/O above 16 N^2 d / sqrt(M)");
}

void c3_streaming(Outcome& o) {
  const auto r = streaming_grid();
  for (const auto& x : r) o.require(x.ok(), "run failed: " + x.status);
  const auto fit = exp::fit_scaling_exponent(r, exp::Axis::M);
  o.detail << "slope " << fmt(fit.slope);
  o.require(fit.slope >= -1.15 && fit.slope <= -0.85, "slope outside [-1.15, -0.85]");
  double worst = 0;
  for (const auto& x : r) {
    const double nn = static_cast<double>(x.n), dd = static_cast<double>(x.d);
    worst = std::max(worst, static_cast<double>(x.io()) /
                                (nn * nn * dd * dd / static_cast<double>(x.m) + nn * dd));
  }
  o.detail << ", max I/O / (N^2 d^2 / M + N d) = " << fmt(worst);
  o.require(worst <= 16.0, "I/O above 16 N^2 d^2 / M + 16 N d");
}

void c4_crossover(Outcome& o) {
  const auto r = crossover_records();
  const double n2 = 32.0 * 32.0;
  const double t = static_cast<double>(r[0].io());
  const double s = static_cast<double>(r[1].io());
  o.detail << "tiling " << r[0].io() << " (" << fmt(t / n2, 2) << " N^2), streaming "
           << r[1].io() << " (" << fmt(s / n2, 2) << " N^2), ratio "
           << fmt(std::max(t, s) / std::min(t, s), 2);
  o.require(r[0].ok() && r[1].ok(), "run failed");
  const double k = bounds::kCrossover;
  o.require(std::max(t, s) / std::min(t, s) <= k, "kernels not within 8x of each other");
  o.require(t <= k * n2 && t >= n2 / k, "tiling not within 8x of N^2");
  o.require(s <= k * n2 && s >= n2 / k, "streaming not within 8x of N^2");

  std::size_t points = 0;
  auto check_dispatch = [&](std::size_t n, std::size_t d, std::size_t m) {
    ++points;
    const auto inst = exp::sweep_instance(7, n, d, 1.0);
    mem::MemoryHierarchy h(m);
    const auto run = attn::dispatch_attention(h, inst);
    o.require(run.algorithm == exp::formula_argmin(n, d, m),
              "dispatch differs from argmin at M=" + std::to_string(m));
  };
  for (std::size_t m : {16, 36, 64, 144, 256}) check_dispatch(64, 16, m);
  for (std::size_t m : {32, 64, 128, 256, 512}) check_dispatch(64, 4, m);
  check_dispatch(32, 8, 64);
  o.detail << "; dispatch matches argmin at " << points << " points";
}

std::vector<SweepRecord> all_measured() {
  auto r = tiling_grid();
  auto s = streaming_grid();
  auto c = crossover_records();
  r.insert(r.end(), s.begin(), s.end());
  r.insert(r.end(), c.begin(), c.end());
  return r;
}

void c5_lower(Outcome& o) {
  const auto r = all_measured();
  double worst = 1e300;
  for (const auto& x : r) {
    o.require(x.ok(), "run failed");
    const double io = static_cast<double>(x.io());
    worst = std::min(worst, io / exp::lower_formula(x.n, x.d, x.m));
    o.require(io >= bounds::kLower * exp::lower_formula(x.n, x.d, x.m),
              "below (1/16) min(N^2 d^2 / M, N^2)");
    o.require(x.io() >= 3 * x.n * x.d, "below 3Nd");
  }
  o.detail << r.size() << " records, min I/O / min(N^2 d^2 / M, N^2) = " << fmt(worst);
}

void c6_epochs(Outcome& o) {
  auto r = tiling_grid();
  const auto s = streaming_grid();
  r.insert(r.end(), s.begin(), s.end());
  double worst = 0;
  for (const auto& x : r) {
    const double cap = 4.0 * static_cast<double>(compress::epoch_progress_bound(
                                 2 * x.m, x.d, compress::FieldRegime::LargeField, x.n));
    worst = std::max(worst, static_cast<double>(x.b_max) / cap);
    o.require(static_cast<double>(x.b_max) <= cap,
              "B_max over cap at d=" + std::to_string(x.d) + " M=" + std::to_string(x.m));
  }
  o.detail << r.size() << " runs, max B_max / cap = " << fmt(worst);
}

void c7_pebbling(Outcome& o) {
  std::size_t schedules = 0;
  double worst = 0;
  for (std::size_t n : {2, 4, 8}) {
    for (std::size_t d : {2, 4}) {
      for (std::size_t mult : {4, 8}) {
        const std::size_t m = mult * d * d;
        const auto dag = pebble::build_attention_dag(n, d);
        const auto s = pebble::blocked_pebbling_schedule(dag, m);
        const auto rep = pebble::validate_calculation(dag.graph, m, s.calculation);
        o.require(rep.valid, "schedule rejected at N=" + std::to_string(n) +
                                 " d=" + std::to_string(d) + " M=" + std::to_string(m));
        const double nn = static_cast<double>(n), dd = static_cast<double>(d);
        const double limit = nn * nn * dd * dd / static_cast<double>(m) + nn * dd;
        worst = std::max(worst, static_cast<double>(rep.io.total()) / limit);
        o.require(static_cast<double>(rep.io.total()) <= 16.0 * limit, "schedule I/O over bound");
        ++schedules;
      }
    }
  }
  pebble::Dag edge;
  edge.add_node(pebble::NodeKind::Input, {});
  edge.add_node(pebble::NodeKind::Generic, {0});
  pebble::Dag path;
  path.add_node(pebble::NodeKind::Input, {});
  path.add_node(pebble::NodeKind::Generic, {0});
  path.add_node(pebble::NodeKind::Generic, {1});
  const auto e = pebble::brute_force_min_io(edge, 2);
  const auto p = pebble::brute_force_min_io(path, 2);
  o.require(e == 2, "single edge search != 2");
  o.require(p == 2, "path search != 2");
  o.detail << schedules << " schedules valid, max I/O / (N^2 d^2 / M + N d) = " << fmt(worst)
           << "; search: edge " << e << ", path " << p;
}

void c8_counts(Outcome& o) {
  std::size_t graphs = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t d = 1; d <= 4; ++d) {
      const auto a = pebble::build_attention_dag(n, d);
      const auto& g = a.graph;
      using K = pebble::NodeKind;
      const std::size_t expect[][2] = {
          {static_cast<std::size_t>(K::Input), 3 * n * d},
          {static_cast<std::size_t>(K::L1Product), n * n * d},
          {static_cast<std::size_t>(K::SumInternal), n * n * (d - 1)},
          {static_cast<std::size_t>(K::QKtRoot), n * n},
          {static_cast<std::size_t>(K::Exp), n * n},
          {static_cast<std::size_t>(K::RowSumInternal), n * (n - 1)},
          {static_cast<std::size_t>(K::RowSumRoot), n},
          {static_cast<std::size_t>(K::Inverse), n},
          {static_cast<std::size_t>(K::L2Product), n * n * d},
          {static_cast<std::size_t>(K::AVSumInternal), n * d * (n - 1)},
          {static_cast<std::size_t>(K::AVRoot), n * d},
          {static_cast<std::size_t>(K::Scale), n * d},
      };
      std::vector<std::size_t> seen(pebble::kNodeKindCount, 0);
      for (pebble::NodeId v = 0; v < g.size(); ++v) ++seen[static_cast<std::size_t>(g.node(v).kind)];
      for (const auto& [kind, count] : expect) {
        o.require(seen[kind] == count,
                  std::string(pebble::kind_name(static_cast<K>(kind))) + " count at N=" +
                      std::to_string(n) + " d=" + std::to_string(d));
      }
      std::set<pebble::NodeId> used;
      std::size_t total = 0;
      for (const auto& t : a.qk_trees) {
        std::set<pebble::NodeId> nodes(t.leaves.begin(), t.leaves.end());
        for (const auto& s : t.steps) nodes.insert(s.node);
        nodes.insert(t.root);
        total += nodes.size();
        used.insert(nodes.begin(), nodes.end());
      }
      o.require(used.size() == total, "summation trees overlap");
      ++graphs;
    }
  }
  o.detail << graphs << " graphs, all 12 node classes match, trees disjoint";
}

void c9_codes(Outcome& o) {
  const auto v = codes::vandermonde_matrix(8, 3, 17);
  const auto vc = codes::all_k_subsets_independent(v, 3);
  o.require(vc.independent && vc.subsets_checked == 56, "Vandermonde triples");
  const auto h = codes::bch_parity_check(4, 5);
  o.require(h.rows() <= 8, "BCH rows above 8");
  const auto dist = codes::min_code_distance(h);
  o.require(dist && *dist == 5, "BCH distance != 5");
  const auto hc = codes::all_k_subsets_independent(h.transpose(), 4);
  o.require(hc.independent && hc.subsets_checked == 1365, "BCH 4-column subsets");
  const auto ham = codes::min_code_distance(codes::bch_parity_check(3, 3));
  o.require(ham && *ham == 3, "Hamming distance != 3");
  o.detail << "Vandermonde " << vc.subsets_checked << " triples independent; BCH rows "
           << h.rows() << ", distance " << (dist ? *dist : 0) << ", " << hc.subsets_checked
           << " column sets independent; Hamming distance " << (ham ? *ham : 0);
}

void c10_compression(Outcome& o) {
  using compress::IndexSet;
  std::size_t instances = 0;
  auto lower_le_upper = [&](const codes::FieldMatrix& k, const IndexSet& idx,
                            std::uint64_t count) {
    const compress::DirectCompressionProtocol p(idx, k.cols(), k.modulus());
    o.require(compress::cc_lower_bound_symbols(count, k.modulus()) <= p.message_length(),
              "lower bound above direct protocol length");
    ++instances;
  };

  codes::FieldMatrix ones(2, 1, 3);
  ones.set(0, 0, 1);
  ones.set(1, 0, 1);
  const IndexSet col(2, {{0, 0}, {1, 0}});
  const auto first = compress::distinct_output_count(ones, col);
  o.require(first == 9, "K=[1;1] count != 9");
  lower_le_upper(ones, col, first);

  const std::vector<std::uint64_t> nodes{1, 2, 0};
  const auto vk = codes::vandermonde_from_nodes(nodes, 2, 3);
  const IndexSet per_row(3, {{0, 0}, {1, 0}, {2, 0}});
  const auto second = compress::distinct_output_count(vk, per_row);
  o.require(second >= 27, "Vandermonde count below 27");
  lower_le_upper(vk, per_row, second);

  std::mt19937_64 rng(10);
  for (int t = 0; t < 40; ++t) {
    const std::uint64_t q = t % 2 ? 5 : 7;
    const std::size_t n = 2 + rng() % 3, d = 1 + rng() % 2;
    const auto k = codes::vandermonde_matrix(n, d, q);
    std::vector<IndexSet::Entry> e;
    for (std::size_t s = 0, size = 1 + rng() % 5; s < size; ++s) e.emplace_back(rng() % n, rng() % n);
    const IndexSet idx(n, e);
    if (idx.distinct_rows().size() * d > 6) continue;
    lower_le_upper(k, idx, compress::distinct_output_count(k, idx));
  }
  o.detail << "counts " << first << " and " << second << "; lower <= upper on " << instances
           << " instances";
}

void c11_partition(Outcome& o) {
  using namespace pebble;
  const auto a = build_attention_dag(2, 2);
  const Dag& g = a.graph;
  std::vector<NodeId> all(g.size());
  for (NodeId v = 0; v < g.size(); ++v) all[v] = v;
  const auto inputs = g.inputs();

  const auto valid = verify_m_partition(g, 12, MPartition{{{all, inputs}}});
  o.require(valid.ok(), "valid example rejected");

  const auto overlap =
      verify_m_partition(g, 12, MPartition{{{all, inputs}, {{all.back()}, {all.back()}}}});
  o.require(overlap.has(PartitionProperty::P1), "P1 overlap not reported");

  std::vector<NodeId> rest;
  for (NodeId v = 0; v < g.size(); ++v) {
    if (!g.is_input(v)) rest.push_back(v);
  }
  const std::vector<NodeId> dom(inputs.begin() + 1, inputs.end());
  const auto p2 = verify_m_partition(g, 12, MPartition{{{inputs, inputs}, {rest, dom}}});
  bool p2_witness = false;
  for (const auto& v : p2.violations) {
    if (v.property == PartitionProperty::P2 && v.witness_path.size() >= 2 &&
        v.witness_path.front() == inputs.front()) {
      p2_witness = true;
    }
  }
  o.require(p2_witness, "P2 path witness missing");

  const auto b = build_attention_dag(1, 2);
  const auto& t = b.qk(0, 0);
  const NodeId p0 = t.leaves[0], p1 = t.leaves[1], s = t.steps[0].node;
  std::vector<NodeId> x{p0, t.root};
  for (NodeId v = 0; v < b.graph.size(); ++v) {
    if (!b.graph.is_input(v) && v != p0 && v != p1 && v != s && v != t.root) x.push_back(v);
  }
  const auto bin = b.graph.inputs();
  const auto p4 = verify_m_partition(
      b.graph, 8,
      MPartition{{{bin, bin}, {x, {p0, s, b.v(0, 0), b.v(0, 1)}}, {{p1, s}, {p0, p1}}}});
  bool p4_witness = false;
  for (const auto& v : p4.violations) {
    if (v.property != PartitionProperty::P4) continue;
    std::set<std::pair<NodeId, NodeId>> edges(v.witness_edges.begin(), v.witness_edges.end());
    p4_witness = edges.count({p0, s}) && edges.count({s, t.root});
  }
  o.require(p4_witness, "P4 cycle witness missing");
  o.detail << "valid example accepted; P1, P2 (path witness), P4 (edge pair witness) rejected";
}

void c12_determinism(Outcome& o) {
  exp::SweepConfig c;
  c.n = {8, 16, 32};
  c.d = {2, 4, 8};
  c.m = {16, 64, 256};
  c.seed = 12;
  const auto dir = std::filesystem::temp_directory_path() / "iolab_acceptance";
  std::filesystem::create_directories(dir);
  std::vector<std::string> bytes;
  for (unsigned threads : {1u, 4u, 0u}) {
    c.threads = threads;
    const auto path = dir / ("sweep_" + std::to_string(threads) + ".csv");
    {
      std::ofstream out(path, std::ios::binary);
      exp::write_sweep_csv(out, exp::run_sweep(c));
    }
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    bytes.push_back(ss.str());
  }
  std::filesystem::remove_all(dir);
  o.require(bytes[0] == bytes[1] && bytes[1] == bytes[2], "CSV bytes differ");
  o.detail << "3 runs, " << bytes[0].size() << " bytes each, identical";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"oracle equivalence", c1_oracle},
      {"tiling scaling", c2_tiling},
      {"streaming scaling", c3_streaming},
      {"crossover", c4_crossover},
      {"lower-bound consistency", c5_lower},
      {"epoch progress", c6_epochs},
      {"pebbling", c7_pebbling},
      {"DAG counts", c8_counts},
      {"codes", c9_codes},
      {"compression counting", c10_compression},
      {"M-partition verifier", c11_partition},
      {"determinism", c12_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " ("
              << criteria[i].first << "): " << o.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
