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

// Constants for the bound checks applied to sweep records. Kept in one
// place so the acceptance thresholds can be audited against the kernels'
// measured constants.

namespace iolab::bounds {

// Upper check: I/O <= kUpper * formula for the record's algorithm.
inline constexpr double kUpper = 16.0;
// Lower check: I/O >= kLower * min(N^2 d^2 / M, N^2).
inline constexpr double kLower = 1.0 / 16.0;
// Epoch check: B_max <= kEpoch * epoch_progress_bound(2M, d).
inline constexpr double kEpoch = 4.0;
// Crossover check: measured I/O of each kernel within this factor of N^2
// and of each other.
inline constexpr double kCrossover = 8.0;

}  // namespace iolab::bounds
