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

// Parameter sweeps over (N, d, M) and kernel, power-law fits of the
// measured I/O, and bound-consistency reports.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iolab/attention.hpp"
#include "iolab/compression.hpp"

namespace iolab::exp {

using attn::Algorithm;

std::optional<Algorithm> algorithm_from_name(const std::string& name);

struct SweepConfig {
  std::vector<std::size_t> n;
  std::vector<std::size_t> d;
  std::vector<std::size_t> m;
  std::vector<Algorithm> algorithms{Algorithm::SquareTiling, Algorithm::Streaming};
  std::uint64_t seed = 0;
  // Only "float" drives the attention kernels.
  std::string value_mode = "float";
  double magnitude = 1.0;
  // Off by default so output is byte-for-byte reproducible.
  bool record_wall_time = false;
  // 0 picks the hardware concurrency.
  unsigned threads = 0;

  // Throws ConfigError on empty grids, zero sizes or an unknown mode.
  void validate() const;
};

// JSON object with keys N, d, M (integer lists), algorithms (names), seed,
// value_mode, magnitude, record_wall_time, threads. Unknown keys are
// rejected.
SweepConfig parse_sweep_config(const std::string& json_text);
SweepConfig load_sweep_config(const std::string& path);

struct SweepRecord {
  Algorithm algorithm = Algorithm::SquareTiling;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t m = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::size_t epochs = 0;
  std::size_t b_max = 0;
  double wall_time = 0.0;
  // "ok", or the error that stopped this grid point.
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
  std::uint64_t io() const { return reads + writes; }
};

using Kernel = std::function<attn::KernelResult(mem::MemoryHierarchy&,
                                                const attn::AttentionInstance&)>;

Kernel kernel_for(Algorithm a);

// Inputs for grid point (N, d): a function of the seed and the shape only,
// so every algorithm and cache size at that shape sees the same matrices.
attn::AttentionInstance sweep_instance(std::uint64_t seed, std::size_t n, std::size_t d,
                                       double magnitude);

// Runs one kernel on a fresh hierarchy and records its counters. Kernel
// errors become the record's status.
SweepRecord measure(Algorithm label, const Kernel& kernel,
                    const attn::AttentionInstance& inst, std::size_t m,
                    bool record_wall_time = false);

// One record per (N, d, M, algorithm), ordered N, then d, then M, then
// algorithm as listed in the config, whatever the thread count.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

inline constexpr const char* kSweepCsvHeader =
    "algorithm,N,d,M,reads,writes,epochs,B_max,wall_time,status";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);

enum class Axis { M, N, D };

std::optional<Axis> axis_from_name(const std::string& name);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  // Root mean square of the log-space residuals.
  double residual = 0.0;
};

// Least-squares slope of log(I/O) against log(axis). Needs at least three
// successful records of one algorithm that differ only along `axis`, with
// at least two distinct axis values; throws FitError otherwise.
FitResult fit_scaling_exponent(const std::vector<SweepRecord>& records, Axis axis);

// Closed-form leading terms, constants dropped.
double tiling_formula(std::size_t n, std::size_t d, std::size_t m);     // N^2 d / sqrt(M)
double streaming_formula(std::size_t n, std::size_t d, std::size_t m);  // N^2 d^2 / M + N d
double lower_formula(std::size_t n, std::size_t d, std::size_t m);      // min(N^2 d^2 / M, N^2)

// The kernel with the smaller leading term among those that can run at
// (M, d); ties go to streaming.
Algorithm formula_argmin(std::size_t n, std::size_t d, std::size_t m);

struct BoundCheck {
  std::size_t record = 0;
  bool upper = true;
  bool lower = true;
  bool epoch = true;
  double upper_limit = 0.0;
  double lower_limit = 0.0;
  double epoch_limit = 0.0;

  bool ok() const { return upper && lower && epoch; }
};

struct BoundsReport {
  std::vector<BoundCheck> checks;  // one per successful record
  std::vector<std::size_t> skipped;  // records whose status is not ok

  bool ok() const;
  std::vector<BoundCheck> failures() const;
};

BoundsReport check_bounds(const std::vector<SweepRecord>& records,
                          compress::FieldRegime regime = compress::FieldRegime::LargeField);

void write_bounds_report(std::ostream& out, const std::vector<SweepRecord>& records,
                         const BoundsReport& report);

}  // namespace iolab::exp
