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

#include "iolab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "iolab/bounds_config.hpp"
#include "iolab/errors.hpp"
#include "json.hpp"

namespace iolab::exp {

using nlohmann::json;

std::optional<Algorithm> algorithm_from_name(const std::string& name) {
  if (name == "tiling" || name == "square_tiling") return Algorithm::SquareTiling;
  if (name == "streaming" || name == "flash") return Algorithm::Streaming;
  return std::nullopt;
}

void SweepConfig::validate() const {
  auto check_grid = [](const std::vector<std::size_t>& g, const char* name) {
    if (g.empty()) throw ConfigError(std::string("sweep grid '") + name + "' is empty");
    for (std::size_t x : g) {
      if (x == 0) throw ConfigError(std::string("sweep grid '") + name + "' contains 0");
    }
  };
  check_grid(n, "N");
  check_grid(d, "d");
  check_grid(m, "M");
  if (algorithms.empty()) throw ConfigError("sweep lists no algorithms");
  if (value_mode != "float") {
    throw ConfigError("value_mode '" + value_mode + "' is not supported by the kernels");
  }
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
    throw ConfigError("magnitude must be positive and finite");
  }
}

SweepConfig parse_sweep_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  SweepConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "N") {
        c.n = value.get<std::vector<std::size_t>>();
      } else if (key == "d") {
        c.d = value.get<std::vector<std::size_t>>();
      } else if (key == "M") {
        c.m = value.get<std::vector<std::size_t>>();
      } else if (key == "algorithms") {
        c.algorithms.clear();
        for (const auto& name : value.get<std::vector<std::string>>()) {
          const auto a = algorithm_from_name(name);
          if (!a) throw ConfigError("unknown algorithm '" + name + "'");
          c.algorithms.push_back(*a);
        }
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "value_mode") {
        c.value_mode = value.get<std::string>();
      } else if (key == "magnitude") {
        c.magnitude = value.get<double>();
      } else if (key == "record_wall_time") {
        c.record_wall_time = value.get<bool>();
      } else if (key == "threads") {
        c.threads = value.get<unsigned>();
      } else {
        throw ConfigError("unknown sweep config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep config has a field of the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sweep config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep_config(ss.str());
}

Kernel kernel_for(Algorithm a) {
  if (a == Algorithm::Streaming) {
    return [](mem::MemoryHierarchy& h, const attn::AttentionInstance& inst) {
      return attn::streaming_attention(h, inst);
    };
  }
  return [](mem::MemoryHierarchy& h, const attn::AttentionInstance& inst) {
    return attn::square_tiling_attention(h, inst);
  };
}

attn::AttentionInstance sweep_instance(std::uint64_t seed, std::size_t n, std::size_t d,
                                       double magnitude) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d)};
  std::mt19937_64 rng(seq);
  return attn::AttentionInstance::random(n, d, magnitude, rng);
}

SweepRecord measure(Algorithm label, const Kernel& kernel,
                    const attn::AttentionInstance& inst, std::size_t m,
                    bool record_wall_time) {
  SweepRecord r;
  r.algorithm = label;
  r.n = inst.n();
  r.d = inst.d();
  r.m = m;
  try {
    mem::MemoryHierarchy h(m);
    const auto start = std::chrono::steady_clock::now();
    const attn::KernelResult run = kernel(h, inst);
    const auto stop = std::chrono::steady_clock::now();
    r.reads = run.io.reads;
    r.writes = run.io.writes;
    r.epochs = run.epochs.epochs;
    r.b_max = run.epochs.max_entries_per_epoch;
    if (record_wall_time) r.wall_time = std::chrono::duration<double>(stop - start).count();
    if (run.overflowed) r.status = "overflow";
  } catch (const Error& e) {
    r.status = e.what();
  }
  return r;
}

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  struct Point {
    std::size_t shape;
    std::size_t m;
    Algorithm algorithm;
  };
  std::vector<attn::AttentionInstance> instances;
  std::vector<Point> points;
  for (std::size_t n : config.n) {
    for (std::size_t d : config.d) {
      const std::size_t shape = instances.size();
      instances.push_back(sweep_instance(config.seed, n, d, config.magnitude));
      for (std::size_t m : config.m) {
        for (Algorithm a : config.algorithms) points.push_back({shape, m, a});
      }
    }
  }

  std::vector<SweepRecord> records(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      const Point& p = points[i];
      records[i] = measure(p.algorithm, kernel_for(p.algorithm), instances[p.shape], p.m,
                           config.record_wall_time);
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return records;
}

namespace {

// CSV field: quoted when it holds a separator, quote or newline.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kSweepCsvHeader << '\n';
  for (const SweepRecord& r : records) {
    std::ostringstream wall;
    wall << std::fixed << std::setprecision(6) << r.wall_time;
    out << attn::algorithm_name(r.algorithm) << ',' << r.n << ',' << r.d << ',' << r.m << ','
        << r.reads << ',' << r.writes << ',' << r.epochs << ',' << r.b_max << ','
        << wall.str() << ',' << csv_field(r.status) << '\n';
  }
}

std::optional<Axis> axis_from_name(const std::string& name) {
  if (name == "M") return Axis::M;
  if (name == "N") return Axis::N;
  if (name == "d") return Axis::D;
  return std::nullopt;
}

FitResult fit_scaling_exponent(const std::vector<SweepRecord>& records, Axis axis) {
  std::vector<const SweepRecord*> used;
  for (const auto& r : records) {
    if (r.ok()) used.push_back(&r);
  }
  if (used.size() < 3) throw FitError("need at least 3 successful records to fit");
  auto value = [axis](const SweepRecord& r) {
    return axis == Axis::M ? r.m : axis == Axis::N ? r.n : r.d;
  };
  auto fixed = [axis](const SweepRecord& r) {
    return axis == Axis::M   ? std::tuple{r.n, r.d}
           : axis == Axis::N ? std::tuple{r.d, r.m}
                             : std::tuple{r.n, r.m};
  };
  const SweepRecord& first = *used.front();
  for (const SweepRecord* r : used) {
    if (r->algorithm != first.algorithm) throw FitError("records mix algorithms");
    if (fixed(*r) != fixed(first)) throw FitError("records vary along more than one axis");
    if (r->io() == 0) throw FitError("record with zero I/O cannot be fitted in log space");
  }

  const double k = static_cast<double>(used.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> xs, ys;
  for (const SweepRecord* r : used) {
    const double x = std::log(static_cast<double>(value(*r)));
    const double y = std::log(static_cast<double>(r->io()));
    xs.push_back(x);
    ys.push_back(y);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = k * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw FitError("all records share one axis value");
  FitResult fit;
  fit.slope = (k * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / k;
  double sq = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sq += e * e;
  }
  fit.residual = std::sqrt(sq / k);
  return fit;
}

double tiling_formula(std::size_t n, std::size_t d, std::size_t m) {
  const double nn = static_cast<double>(n);
  return nn * nn * static_cast<double>(d) / std::sqrt(static_cast<double>(m));
}

double streaming_formula(std::size_t n, std::size_t d, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return nn * nn * dd * dd / static_cast<double>(m) + nn * dd;
}

double lower_formula(std::size_t n, std::size_t d, std::size_t m) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return std::min(nn * nn * dd * dd / static_cast<double>(m), nn * nn);
}

Algorithm formula_argmin(std::size_t n, std::size_t d, std::size_t m) {
  (void)n;
  // N^2 d^2 / M <= N^2 d / sqrt(M) exactly when M >= d^2.
  const bool streaming_cheaper = m >= d * d;
  const bool streaming_admissible = m >= 8 * d;
  return streaming_cheaper && streaming_admissible ? Algorithm::Streaming
                                                   : Algorithm::SquareTiling;
}

bool BoundsReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.ok(); });
}

std::vector<BoundCheck> BoundsReport::failures() const {
  std::vector<BoundCheck> out;
  for (const auto& c : checks) {
    if (!c.ok()) out.push_back(c);
  }
  return out;
}

BoundsReport check_bounds(const std::vector<SweepRecord>& records,
                          compress::FieldRegime regime) {
  BoundsReport report;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SweepRecord& r = records[i];
    if (!r.ok()) {
      report.skipped.push_back(i);
      continue;
    }
    BoundCheck c;
    c.record = i;
    const double io = static_cast<double>(r.io());
    const double formula = r.algorithm == Algorithm::Streaming ? streaming_formula(r.n, r.d, r.m)
                                                               : tiling_formula(r.n, r.d, r.m);
    c.upper_limit = bounds::kUpper * formula;
    c.lower_limit = std::max(bounds::kLower * lower_formula(r.n, r.d, r.m),
                             3.0 * static_cast<double>(r.n * r.d));
    c.epoch_limit = bounds::kEpoch *
                    static_cast<double>(compress::epoch_progress_bound(2 * r.m, r.d, regime, r.n));
    c.upper = io <= c.upper_limit;
    c.lower = io >= c.lower_limit;
    c.epoch = static_cast<double>(r.b_max) <= c.epoch_limit;
    report.checks.push_back(c);
  }
  return report;
}

void write_bounds_report(std::ostream& out, const std::vector<SweepRecord>& records,
                         const BoundsReport& report) {
  auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
  for (const BoundCheck& c : report.checks) {
    const SweepRecord& r = records.at(c.record);
    out << attn::algorithm_name(r.algorithm) << " N=" << r.n << " d=" << r.d << " M=" << r.m
        << " io=" << r.io() << " upper<=" << c.upper_limit << ":" << flag(c.upper)
        << " lower>=" << c.lower_limit << ":" << flag(c.lower) << " B_max=" << r.b_max
        << "<=" << c.epoch_limit << ":" << flag(c.epoch) << '\n';
  }
  for (std::size_t i : report.skipped) {
    const SweepRecord& r = records.at(i);
    out << attn::algorithm_name(r.algorithm) << " N=" << r.n << " d=" << r.d << " M=" << r.m
        << " skipped: " << r.status << '\n';
  }
}

}  // namespace iolab::exp
