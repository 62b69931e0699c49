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

#include <cstdint>

namespace iolab {

// 128-bit scratch for overflow-free products.
__extension__ using u128 = unsigned __int128;

inline std::uint64_t add_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  const std::uint64_t s = a + b;
  return (s >= q || s < a) ? s - q : s;
}

inline std::uint64_t sub_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return a >= b ? a - b : a + (q - b);
}

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
  return static_cast<std::uint64_t>(
      (static_cast<u128>(a) * b) % q);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp,
                             std::uint64_t q) {
  std::uint64_t result = 1 % q;
  base %= q;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, q);
    base = mul_mod(base, base, q);
    exp >>= 1;
  }
  return result;
}

// Inverse of a nonzero element of F_q, q prime (Fermat).
inline std::uint64_t inv_mod(std::uint64_t a, std::uint64_t q) {
  return pow_mod(a, q - 2, q);
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t f = 3; f <= n / f; f += 2) {
    if (n % f == 0) return false;
  }
  return true;
}

}  // namespace iolab
