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

// Two-level memory hierarchy with exact I/O accounting.
//
// A MemoryHierarchy owns M cache slots and an unbounded word-addressed slow
// memory. All arithmetic happens on cache slots; moving one word between
// the levels is one I/O and is appended to the trace. There is no eviction
// policy: callers free slots explicitly.

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iolab::mem {

using Address = std::uint64_t;

// Value kind of a simulation. modulus == 0 selects 64-bit floats, otherwise
// words are residues modulo the (prime) modulus.
struct ValueKind {
  std::uint64_t modulus = 0;

  static ValueKind real() { return {}; }
  static ValueKind prime_field(std::uint64_t q);

  bool is_field() const { return modulus != 0; }
  friend bool operator==(const ValueKind&, const ValueKind&) = default;
};

class Word {
 public:
  Word() = default;
  static Word real(double v);
  static Word field(std::uint64_t residue, std::uint64_t modulus);

  bool is_field() const { return modulus_ != 0; }
  std::uint64_t modulus() const { return modulus_; }
  ValueKind kind() const { return ValueKind{modulus_}; }

  // Throws UsageError when called on the wrong kind.
  double as_real() const;
  std::uint64_t residue() const;

  friend bool operator==(const Word&, const Word&) = default;

 private:
  double real_ = 0.0;
  std::uint64_t residue_ = 0;
  std::uint64_t modulus_ = 0;
};

std::string to_string(const Word& w);

// Arithmetic primitives available inside the cache. Arity in parentheses.
enum class Op {
  Copy,        // (1) a
  Add,         // (2) a + b
  Sub,         // (2) a - b
  Mul,         // (2) a * b
  Div,         // (2) a / b
  Neg,         // (1) -a
  Reciprocal,  // (1) 1 / a
  Exp,         // (1) e^a, real mode only
  Max,         // (2) max(a, b), real mode only
  MulAdd,      // (3) a + b * c
};

int arity(Op op);
const char* op_name(Op op);

// Handle to an occupied cache slot.
struct Slot {
  std::uint32_t index = 0;
  friend bool operator==(const Slot&, const Slot&) = default;
};

enum class IoKind { Read, Write };

struct IoEvent {
  IoKind kind = IoKind::Read;
  Address address = 0;
  std::uint64_t tick = 0;
  Word value;  // word moved; kept for replay, not exported
};

struct IoStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  std::uint64_t total() const { return reads + writes; }
  friend bool operator==(const IoStats&, const IoStats&) = default;
};

// Contiguous slice [begin, end) of a trace.
struct Epoch {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t io_count() const { return end - begin; }
};

class MemoryHierarchy {
 public:
  // Throws ConfigError when capacity < 4.
  MemoryHierarchy(std::size_t capacity, ValueKind kind = ValueKind::real());

  std::size_t capacity() const { return slots_.size(); }
  ValueKind value_kind() const { return kind_; }
  std::size_t occupied() const { return occupied_; }
  std::size_t free_slots() const { return capacity() - occupied_; }
  std::size_t peak_occupied() const { return peak_occupied_; }

  // Places an input word in slow memory as part of the initial
  // configuration. Not an I/O.
  void store_input(Address addr, Word w);

  // Slow-memory lookup without I/O, for extracting results after a run.
  std::optional<Word> peek_memory(Address addr) const;

  // Copies memory[addr] into a fresh slot. One read.
  Slot read_word(Address addr);

  // Copies a slot to memory[addr]. One write; the slot stays occupied.
  void write_word(Slot slot, Address addr);

  void free_slot(Slot slot);
  void free_slots(std::span<const Slot> slots);

  // Fresh slot holding a constant (e.g. an accumulator initialized to 0).
  Slot constant(Word w);
  Slot zero();

  // Result into a fresh slot. Operands must be resident.
  Slot compute(Op op, std::span<const Slot> operands);
  Slot compute(Op op, std::initializer_list<Slot> operands) {
    return compute(op, std::span<const Slot>(operands.begin(), operands.size()));
  }

  // Result overwrites `target`, which may also appear among the operands.
  void compute_into(Slot target, Op op, std::span<const Slot> operands);
  void compute_into(Slot target, Op op, std::initializer_list<Slot> operands) {
    compute_into(target, op,
                 std::span<const Slot>(operands.begin(), operands.size()));
  }

  const Word& value(Slot slot) const;

  const IoStats& io() const { return io_; }
  std::uint64_t io_count() const { return io_.total(); }
  const std::vector<IoEvent>& trace() const { return trace_; }

  // Set once any real-mode operation produced inf or NaN.
  bool overflowed() const { return overflowed_; }

  // Snapshot of slow memory as (address, word) pairs in address order.
  std::vector<std::pair<Address, Word>> memory_contents() const;

 private:
  Slot allocate(Word w);
  std::uint32_t checked_index(Slot slot, const char* what) const;
  Word apply(Op op, std::span<const Slot> operands);
  void check_kind(const Word& w) const;
  void record(IoKind kind, Address addr, const Word& w);

  ValueKind kind_;
  std::vector<std::optional<Word>> slots_;
  std::vector<std::uint32_t> free_list_;
  std::size_t occupied_ = 0;
  std::size_t peak_occupied_ = 0;
  std::vector<std::optional<Word>> memory_;
  std::vector<IoEvent> trace_;
  IoStats io_;
  bool overflowed_ = false;
};

// Greedy left-to-right split into epochs of exactly M I/O events (last one
// partial). An empty trace yields a single empty epoch.
std::vector<Epoch> split_into_epochs(std::span<const IoEvent> trace,
                                     std::size_t m);
std::vector<Epoch> split_into_epochs(std::size_t io_events, std::size_t m);

// Epoch index of something that happened after `io_before` I/O events had
// been issued. Events between two epochs belong to the later one; anything
// after the final event belongs to the last epoch.
std::size_t epoch_of(std::uint64_t io_before, std::size_t m,
                     std::size_t epoch_count);

// CSV with header "tick,kind,address"; kind is "read" or "write".
void write_trace_csv(std::ostream& out, std::span<const IoEvent> trace);

// Applies the trace to `initial` memory and returns the final contents.
// Throws AddressError if a read does not observe the value the trace says
// was moved.
std::vector<std::pair<Address, Word>> replay_trace(
    std::vector<std::pair<Address, Word>> initial,
    std::span<const IoEvent> trace);

}  // namespace iolab::mem
