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
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace iolab {

// Base class for every error raised by the library. Subclasses name the
// failing contract so callers can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Cache is full when a new slot is requested.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Read of an address that was never initialized in slow memory.
class AddressError : public Error {
 public:
  using Error::Error;
};

// Operation applied to an empty cache slot.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Compute operand is not cache resident.
class ResidencyError : public Error {
 public:
  using Error::Error;
};

// Kernel asked to run outside the cache-size regime it supports.
class RegimeError : public Error {
 public:
  using Error::Error;
};

class FieldError : public Error {
 public:
  using Error::Error;
};

// An exhaustive enumeration would exceed its configured budget.
class EnumerationCapError : public Error {
 public:
  EnumerationCapError(const std::string& what, std::uint64_t required,
                      std::uint64_t cap)
      : Error(what + " (requires " + std::to_string(required) +
              ", cap " + std::to_string(cap) + ")"),
        required_(required),
        cap_(cap) {}

  std::uint64_t required() const { return required_; }
  std::uint64_t cap() const { return cap_; }

 private:
  std::uint64_t required_;
  std::uint64_t cap_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Enumeration budget shared by the exhaustive checkers. IOLAB_ENUM_CAP
// overrides the compiled default when set to a positive integer.
inline std::uint64_t enumeration_cap(std::uint64_t fallback) {
  if (const char* env = std::getenv("IOLAB_ENUM_CAP")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return fallback;
}

}  // namespace iolab
