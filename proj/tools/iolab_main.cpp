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

// Command-line front end. Exit status: 0 when every enabled check passes,
// 1 when a check fails, 2 on bad input, 3 when an enumeration cap is hit.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iolab/attention.hpp"
#include "iolab/bounds_config.hpp"
#include "iolab/codes.hpp"
#include "iolab/compression.hpp"
#include "iolab/errors.hpp"
#include "iolab/experiments.hpp"
#include "iolab/pebbling.hpp"

namespace {

using namespace iolab;

constexpr int kCheckFailed = 1;
constexpr int kBadInput = 2;
constexpr int kCapExceeded = 3;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

// attn run ------------------------------------------------------------------

struct AttnRunArgs {
  std::size_t n = 16;
  std::size_t d = 4;
  std::size_t m = 64;
  std::uint64_t seed = 1;
  double magnitude = 1.0;
  std::string algorithm = "auto";
  std::string q_path, k_path, v_path;
  std::string out_path;
  std::string trace_path;
};

int attn_run(const AttnRunArgs& a) {
  attn::AttentionInstance inst;
  if (!a.q_path.empty() || !a.k_path.empty() || !a.v_path.empty()) {
    if (a.q_path.empty() || a.k_path.empty() || a.v_path.empty()) {
      throw ConfigError("--q, --k and --v must be given together");
    }
    inst.q = load_matrix(a.q_path);
    inst.k = load_matrix(a.k_path);
    inst.v = load_matrix(a.v_path);
  } else {
    inst = exp::sweep_instance(a.seed, a.n, a.d, a.magnitude);
  }
  inst.validate();

  mem::MemoryHierarchy h(a.m);
  attn::KernelResult run;
  if (a.algorithm == "auto") {
    run = attn::dispatch_attention(h, inst);
  } else {
    const auto alg = exp::algorithm_from_name(a.algorithm);
    if (!alg) throw ConfigError("unknown algorithm '" + a.algorithm + "'");
    run = exp::kernel_for(*alg)(h, inst);
  }
  const double err = relative_frobenius_error(run.output, attn::reference_attention(inst));
  const bool match = err <= 1e-9 && !run.overflowed;

  std::cout << "algorithm " << attn::algorithm_name(run.algorithm) << "\n"
            << "N " << inst.n() << " d " << inst.d() << " M " << a.m << "\n"
            << "block " << run.block_size << "\n"
            << "reads " << run.io.reads << " writes " << run.io.writes << " total "
            << run.io.total() << "\n"
            << "epochs " << run.epochs.epochs << " B_max " << run.epochs.max_entries_per_epoch
            << "\n"
            << "relative_error " << std::scientific << std::setprecision(3) << err << "\n"
            << "reference " << (match ? "match" : "MISMATCH") << "\n";
  if (!a.out_path.empty()) save_matrix(a.out_path, run.output);
  if (!a.trace_path.empty()) {
    auto out = open_out(a.trace_path);
    mem::write_trace_csv(out, h.trace());
  }
  return match ? 0 : kCheckFailed;
}

// attn sweep ----------------------------------------------------------------

int attn_sweep(const std::string& config_path, const std::string& out_path,
               const std::string& report_path, bool check) {
  const exp::SweepConfig config = exp::load_sweep_config(config_path);
  const auto records = exp::run_sweep(config);
  {
    auto out = open_out(out_path);
    exp::write_sweep_csv(out, records);
  }
  const exp::BoundsReport report = exp::check_bounds(records);
  if (!report_path.empty()) {
    auto out = open_out(report_path);
    exp::write_bounds_report(out, records, report);
  }
  std::cout << records.size() << " records, " << report.skipped.size() << " skipped, "
            << report.failures().size() << " bound failures\n";
  if (!check) return 0;
  if (!report.ok()) exp::write_bounds_report(std::cerr, records, report);
  return report.ok() ? 0 : kCheckFailed;
}

// pebble --------------------------------------------------------------------

int pebble_build(std::size_t n, std::size_t d, const std::string& out_path) {
  const pebble::AttentionDag dag = pebble::build_attention_dag(n, d);
  if (out_path.empty()) {
    pebble::write_dag_jsonl(std::cout, dag.graph);
  } else {
    auto out = open_out(out_path);
    pebble::write_dag_jsonl(out, dag.graph);
    std::cout << dag.graph.size() << " nodes\n";
  }
  return 0;
}

pebble::Dag load_dag(const std::string& path) {
  auto in = open_in(path);
  return pebble::read_dag_jsonl(in);
}

int pebble_validate(const std::string& dag_path, std::size_t m, const std::string& calc_path) {
  const pebble::Dag dag = load_dag(dag_path);
  auto in = open_in(calc_path);
  const pebble::Calculation calc = pebble::read_calculation_json(in);
  const auto report = pebble::validate_calculation(dag, m, calc);
  if (report.valid) {
    std::cout << "valid io " << report.io.total() << " reads " << report.io.reads
              << " writes " << report.io.writes << " peak_red " << report.peak_red << "\n";
    return 0;
  }
  const auto& v = *report.violation;
  std::cout << "invalid at transition " << v.index << " (" << pebble::rule_name(v.rule)
            << " on vertex " << v.vertex << "): " << v.reason << "\n";
  return kCheckFailed;
}

int pebble_search(const std::string& dag_path, std::size_t m) {
  const pebble::Dag dag = load_dag(dag_path);
  std::cout << "min_io " << pebble::brute_force_min_io(dag, m) << "\n";
  return 0;
}

int pebble_schedule(std::size_t n, std::size_t d, std::size_t m, const std::string& out_path) {
  const pebble::AttentionDag dag = pebble::build_attention_dag(n, d);
  const pebble::PebblingSchedule s = pebble::blocked_pebbling_schedule(dag, m);
  const auto report = pebble::validate_calculation(dag.graph, m, s.calculation);
  if (!out_path.empty()) {
    auto out = open_out(out_path);
    pebble::write_calculation_json(out, s.calculation);
  }
  std::cout << "block_rows " << s.block_rows << " peak_red " << s.peak_red << " transitions "
            << s.calculation.size() << " io " << report.io.total() << " valid "
            << (report.valid ? "yes" : "no") << "\n";
  return report.valid ? 0 : kCheckFailed;
}

// codes ---------------------------------------------------------------------

void maybe_write(const std::string& path, const codes::FieldMatrix& m) {
  if (path.empty()) return;
  auto out = open_out(path);
  codes::write_csv(out, m);
}

int report_subsets(const codes::FieldMatrix& m, std::size_t k) {
  const auto check = codes::all_k_subsets_independent(m, k);
  std::cout << "subsets_checked " << check.subsets_checked << " all_" << k
            << "_row_subsets_independent " << (check.independent ? "yes" : "no") << "\n";
  if (check.witness) {
    std::cout << "dependent_rows";
    for (std::size_t r : *check.witness) std::cout << ' ' << r;
    std::cout << "\n";
  }
  return check.independent ? 0 : kCheckFailed;
}

int codes_vandermonde(std::size_t n, std::size_t d, std::uint64_t q, const std::string& out) {
  const auto m = codes::vandermonde_matrix(n, d, q);
  maybe_write(out, m);
  std::cout << "vandermonde " << n << "x" << d << " over F_" << q << "\n";
  return report_subsets(m, d);
}

int codes_bch(std::size_t m, std::size_t s, const std::string& out) {
  const auto h = codes::bch_parity_check(m, s);
  maybe_write(out, h);
  std::cout << "bch m " << m << " s " << s << " rows " << h.rows() << " cols " << h.cols()
            << " rank " << h.rank() << "\n";
  const auto dist = codes::min_code_distance(h);
  if (dist) {
    std::cout << "min_distance " << *dist << "\n";
  } else {
    std::cout << "min_distance none (trivial code)\n";
  }
  return report_subsets(h.transpose(), s - 1);
}

int codes_verify(const std::string& path, std::size_t k, std::uint64_t q) {
  auto in = open_in(path);
  return report_subsets(codes::read_field_csv(in, q), k);
}

// compress ------------------------------------------------------------------

int compress_count(std::uint64_t q, std::size_t n, std::size_t d, const std::string& indices,
                   const std::string& k_source) {
  codes::FieldMatrix k;
  if (k_source == "vandermonde") {
    k = codes::vandermonde_matrix(n, d, q);
  } else if (k_source == "bch") {
    if (q != 2) throw ConfigError("--K bch needs --q 2");
    k = codes::binary_independence_matrix(n, d).k;
  } else {
    auto in = open_in(k_source);
    k = codes::read_field_csv(in, q);
    if (k.rows() != n || k.cols() != d) throw ConfigError("K file is not N x d");
  }
  auto in = open_in(indices);
  const compress::IndexSet index = compress::read_index_csv(in, n);
  const std::uint64_t count = compress::distinct_output_count(k, index);
  const std::uint64_t lower = compress::cc_lower_bound_symbols(count, q);
  const compress::DirectCompressionProtocol protocol(index, d, q);
  const std::size_t upper = protocol.message_length();
  std::cout << "distinct_outputs " << count << "\n"
            << "lower_bound_symbols " << lower << "\n"
            << "direct_protocol_symbols " << upper << " ("
            << (protocol.strategy() == compress::Strategy::SendRows ? "rows" : "entries")
            << ")\n"
            << "bits " << compress::message_bits(upper, q) << "\n";
  return lower <= upper ? 0 : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"I/O complexity lab for attention kernels"};
  app.require_subcommand(1);
  int status = 0;

  auto* attn_cmd = app.add_subcommand("attn", "attention kernels on the simulated hierarchy");
  attn_cmd->require_subcommand(1);

  AttnRunArgs run_args;
  auto* run = attn_cmd->add_subcommand("run", "run one kernel and compare with the reference");
  run->add_option("--N", run_args.n, "sequence length");
  run->add_option("--d", run_args.d, "head dimension");
  run->add_option("--M", run_args.m, "cache size in words");
  run->add_option("--seed", run_args.seed, "input seed");
  run->add_option("--magnitude", run_args.magnitude, "entries uniform in [-x, x]");
  run->add_option("--algorithm", run_args.algorithm, "tiling, streaming or auto");
  run->add_option("--q", run_args.q_path, "Q matrix file (.csv or .bin)");
  run->add_option("--k", run_args.k_path, "K matrix file");
  run->add_option("--v", run_args.v_path, "V matrix file");
  run->add_option("--out", run_args.out_path, "write O here");
  run->add_option("--trace", run_args.trace_path, "write the I/O trace CSV here");
  run->callback([&] { status = attn_run(run_args); });

  std::string config_path, sweep_out, report_path;
  bool no_check = false;
  auto* sweep = attn_cmd->add_subcommand("sweep", "run a parameter sweep");
  sweep->add_option("--config", config_path, "sweep JSON")->required();
  sweep->add_option("--out", sweep_out, "results CSV")->required();
  sweep->add_option("--report", report_path, "bound check report");
  sweep->add_flag("--no-check", no_check, "always exit 0 after writing results");
  sweep->callback([&] { status = attn_sweep(config_path, sweep_out, report_path, !no_check); });

  auto* peb = app.add_subcommand("pebble", "red-blue pebbling on the attention graph");
  peb->require_subcommand(1);
  std::size_t pn = 2, pd = 2, pm = 0;
  std::string dag_path, calc_path, peb_out;

  auto* build = peb->add_subcommand("build", "write the attention DAG as JSON lines");
  build->add_option("--N", pn)->required();
  build->add_option("--d", pd)->required();
  build->add_option("--out", peb_out);
  build->callback([&] { status = pebble_build(pn, pd, peb_out); });

  auto* validate = peb->add_subcommand("validate", "check a calculation against a DAG");
  validate->add_option("--dag", dag_path)->required();
  validate->add_option("--M", pm)->required();
  validate->add_option("--calc", calc_path)->required();
  validate->callback([&] { status = pebble_validate(dag_path, pm, calc_path); });

  auto* search = peb->add_subcommand("search", "exact minimum I/O of a tiny DAG");
  search->add_option("--dag", dag_path)->required();
  search->add_option("--M", pm)->required();
  search->callback([&] { status = pebble_search(dag_path, pm); });

  auto* sched = peb->add_subcommand("schedule", "blocked schedule for the attention DAG");
  sched->add_option("--N", pn)->required();
  sched->add_option("--d", pd)->required();
  sched->add_option("--M", pm)->required();
  sched->add_option("--out", peb_out);
  sched->callback([&] { status = pebble_schedule(pn, pd, pm, peb_out); });

  auto* codes_cmd = app.add_subcommand("codes", "independence constructions");
  codes_cmd->require_subcommand(1);
  std::size_t cn = 0, cd = 0, cm = 0, cs = 0, ck = 0;
  std::uint64_t cq = 2;
  std::string codes_out, codes_file;

  auto* vand = codes_cmd->add_subcommand("vandermonde", "N x d Vandermonde over F_q");
  vand->add_option("N", cn)->required();
  vand->add_option("d", cd)->required();
  vand->add_option("q", cq)->required();
  vand->add_option("--out", codes_out);
  vand->callback([&] { status = codes_vandermonde(cn, cd, cq, codes_out); });

  auto* bch = codes_cmd->add_subcommand("bch", "binary BCH parity check of length 2^m - 1");
  bch->add_option("m", cm)->required();
  bch->add_option("s", cs)->required();
  bch->add_option("--out", codes_out);
  bch->callback([&] { status = codes_bch(cm, cs, codes_out); });

  auto* verify = codes_cmd->add_subcommand("verify", "check every k-row subset of a CSV matrix");
  verify->add_option("file", codes_file)->required();
  verify->add_option("k", ck)->required();
  verify->add_option("--q", cq, "field modulus");
  verify->callback([&] { status = codes_verify(codes_file, ck, cq); });

  auto* comp = app.add_subcommand("compress", "matrix-entry compression counting");
  comp->require_subcommand(1);
  std::uint64_t xq = 3;
  std::size_t xn = 0, xd = 0;
  std::string indices, k_source = "vandermonde";
  auto* count = comp->add_subcommand("count", "distinct outputs over the rows of Q in I");
  count->add_option("--q", xq)->required();
  count->add_option("--N", xn)->required();
  count->add_option("--d", xd)->required();
  count->add_option("--indices", indices, "CSV of row,col (0-based)")->required();
  count->add_option("--K", k_source, "vandermonde, bch or a CSV file");
  count->callback([&] { status = compress_count(xq, xn, xd, indices, k_source); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const EnumerationCapError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCapExceeded;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return status;
}
