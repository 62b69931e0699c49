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

#include "iolab/memory_hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "iolab/errors.hpp"
#include "iolab/modular.hpp"

namespace iolab::mem {

ValueKind ValueKind::prime_field(std::uint64_t q) {
  if (!is_prime(q)) {
    throw FieldError("field modulus " + std::to_string(q) + " is not prime");
  }
  return ValueKind{q};
}

Word Word::real(double v) {
  Word w;
  w.real_ = v;
  return w;
}

Word Word::field(std::uint64_t residue, std::uint64_t modulus) {
  if (modulus < 2) throw FieldError("field word needs a modulus >= 2");
  Word w;
  w.residue_ = residue % modulus;
  w.modulus_ = modulus;
  return w;
}

double Word::as_real() const {
  if (is_field()) throw UsageError("word is a field element, not a real");
  return real_;
}

std::uint64_t Word::residue() const {
  if (!is_field()) throw UsageError("word is a real, not a field element");
  return residue_;
}

std::string to_string(const Word& w) {
  std::ostringstream os;
  if (w.is_field()) {
    os << w.residue() << " (mod " << w.modulus() << ")";
  } else {
    os.precision(17);
    os << w.as_real();
  }
  return os.str();
}

int arity(Op op) {
  switch (op) {
    case Op::Copy:
    case Op::Neg:
    case Op::Reciprocal:
    case Op::Exp:
      return 1;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Max:
      return 2;
    case Op::MulAdd:
      return 3;
  }
  return 0;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::Copy: return "copy";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Reciprocal: return "reciprocal";
    case Op::Exp: return "exp";
    case Op::Max: return "max";
    case Op::MulAdd: return "muladd";
  }
  return "?";
}

MemoryHierarchy::MemoryHierarchy(std::size_t capacity, ValueKind kind)
    : kind_(kind) {
  if (capacity < 4) {
    throw ConfigError("cache capacity must be at least 4 words, got " +
                      std::to_string(capacity));
  }
  if (kind.is_field() && !is_prime(kind.modulus)) {
    throw FieldError("field modulus " + std::to_string(kind.modulus) +
                     " is not prime");
  }
  slots_.resize(capacity);
  free_list_.reserve(capacity);
  // Lowest index is handed out first.
  for (std::size_t i = capacity; i-- > 0;) {
    free_list_.push_back(static_cast<std::uint32_t>(i));
  }
}

void MemoryHierarchy::check_kind(const Word& w) const {
  if (w.kind() != kind_) {
    throw FieldError("word of kind modulus=" + std::to_string(w.modulus()) +
                     " used in a hierarchy of modulus=" +
                     std::to_string(kind_.modulus));
  }
}

void MemoryHierarchy::store_input(Address addr, Word w) {
  check_kind(w);
  if (addr >= memory_.size()) memory_.resize(addr + 1);
  memory_[addr] = w;
}

std::optional<Word> MemoryHierarchy::peek_memory(Address addr) const {
  if (addr >= memory_.size()) return std::nullopt;
  return memory_[addr];
}

Slot MemoryHierarchy::allocate(Word w) {
  if (free_list_.empty()) {
    throw CapacityError("cache full: all " + std::to_string(capacity()) +
                        " slots occupied");
  }
  const std::uint32_t index = free_list_.back();
  free_list_.pop_back();
  slots_[index] = w;
  ++occupied_;
  peak_occupied_ = std::max(peak_occupied_, occupied_);
  return Slot{index};
}

std::uint32_t MemoryHierarchy::checked_index(Slot slot, const char* what) const {
  if (slot.index >= slots_.size() || !slots_[slot.index]) {
    throw UsageError(std::string(what) + ": slot " +
                     std::to_string(slot.index) + " is empty");
  }
  return slot.index;
}

void MemoryHierarchy::record(IoKind kind, Address addr, const Word& w) {
  trace_.push_back(IoEvent{kind, addr, trace_.size(), w});
  if (kind == IoKind::Read) {
    ++io_.reads;
  } else {
    ++io_.writes;
  }
}

Slot MemoryHierarchy::read_word(Address addr) {
  if (addr >= memory_.size() || !memory_[addr]) {
    throw AddressError("read of uninitialized address " + std::to_string(addr));
  }
  const Word w = *memory_[addr];
  const Slot s = allocate(w);
  record(IoKind::Read, addr, w);
  return s;
}

void MemoryHierarchy::write_word(Slot slot, Address addr) {
  const Word w = *slots_[checked_index(slot, "write_word")];
  if (addr >= memory_.size()) memory_.resize(addr + 1);
  memory_[addr] = w;
  record(IoKind::Write, addr, w);
}

void MemoryHierarchy::free_slot(Slot slot) {
  const std::uint32_t index = checked_index(slot, "free_slot");
  slots_[index].reset();
  free_list_.push_back(index);
  --occupied_;
}

void MemoryHierarchy::free_slots(std::span<const Slot> slots) {
  for (const Slot s : slots) free_slot(s);
}

Slot MemoryHierarchy::constant(Word w) {
  check_kind(w);
  return allocate(w);
}

Slot MemoryHierarchy::zero() {
  return constant(kind_.is_field() ? Word::field(0, kind_.modulus)
                                   : Word::real(0.0));
}

const Word& MemoryHierarchy::value(Slot slot) const {
  return *slots_[checked_index(slot, "value")];
}

Word MemoryHierarchy::apply(Op op, std::span<const Slot> operands) {
  if (static_cast<int>(operands.size()) != arity(op)) {
    throw UsageError(std::string("operation ") + op_name(op) + " takes " +
                     std::to_string(arity(op)) + " operands, got " +
                     std::to_string(operands.size()));
  }
  Word args[3];
  for (std::size_t i = 0; i < operands.size(); ++i) {
    const Slot s = operands[i];
    if (s.index >= slots_.size() || !slots_[s.index]) {
      throw ResidencyError(std::string("operand ") + std::to_string(i) +
                           " of " + op_name(op) + " is not cache resident");
    }
    args[i] = *slots_[s.index];
  }

  if (kind_.is_field()) {
    const std::uint64_t q = kind_.modulus;
    auto r = [&](int i) { return args[i].residue(); };
    std::uint64_t out = 0;
    switch (op) {
      case Op::Copy: out = r(0); break;
      case Op::Add: out = add_mod(r(0), r(1), q); break;
      case Op::Sub: out = sub_mod(r(0), r(1), q); break;
      case Op::Mul: out = mul_mod(r(0), r(1), q); break;
      case Op::Neg: out = sub_mod(0, r(0), q); break;
      case Op::MulAdd: out = add_mod(r(0), mul_mod(r(1), r(2), q), q); break;
      case Op::Div:
      case Op::Reciprocal: {
        const std::uint64_t den = op == Op::Div ? r(1) : r(0);
        if (den == 0) throw FieldError("division by zero in F_" + std::to_string(q));
        const std::uint64_t num = op == Op::Div ? r(0) : 1;
        out = mul_mod(num, inv_mod(den, q), q);
        break;
      }
      case Op::Exp:
      case Op::Max:
        throw FieldError(std::string(op_name(op)) +
                         " is not defined over a finite field");
    }
    return Word::field(out, q);
  }

  auto x = [&](int i) { return args[i].as_real(); };
  double out = 0.0;
  switch (op) {
    case Op::Copy: out = x(0); break;
    case Op::Add: out = x(0) + x(1); break;
    case Op::Sub: out = x(0) - x(1); break;
    case Op::Mul: out = x(0) * x(1); break;
    case Op::Div: out = x(0) / x(1); break;
    case Op::Neg: out = -x(0); break;
    case Op::Reciprocal: out = 1.0 / x(0); break;
    case Op::Exp: out = std::exp(x(0)); break;
    case Op::Max: out = std::max(x(0), x(1)); break;
    case Op::MulAdd: out = x(0) + x(1) * x(2); break;
  }
  // -inf is a legitimate running-max seed; anything else non-finite is not.
  if (std::isnan(out) || (std::isinf(out) && out > 0)) overflowed_ = true;
  return Word::real(out);
}

Slot MemoryHierarchy::compute(Op op, std::span<const Slot> operands) {
  const Word w = apply(op, operands);
  return allocate(w);
}

void MemoryHierarchy::compute_into(Slot target, Op op,
                                   std::span<const Slot> operands) {
  const std::uint32_t index = checked_index(target, "compute_into");
  slots_[index] = apply(op, operands);
}

std::vector<std::pair<Address, Word>> MemoryHierarchy::memory_contents() const {
  std::vector<std::pair<Address, Word>> out;
  for (Address a = 0; a < memory_.size(); ++a) {
    if (memory_[a]) out.emplace_back(a, *memory_[a]);
  }
  return out;
}

std::vector<Epoch> split_into_epochs(std::size_t io_events, std::size_t m) {
  if (m == 0) throw ConfigError("epoch size must be positive");
  std::vector<Epoch> epochs;
  if (io_events == 0) {
    epochs.push_back(Epoch{0, 0});
    return epochs;
  }
  for (std::size_t begin = 0; begin < io_events; begin += m) {
    epochs.push_back(Epoch{begin, std::min(begin + m, io_events)});
  }
  return epochs;
}

std::vector<Epoch> split_into_epochs(std::span<const IoEvent> trace,
                                     std::size_t m) {
  return split_into_epochs(trace.size(), m);
}

std::size_t epoch_of(std::uint64_t io_before, std::size_t m,
                     std::size_t epoch_count) {
  const std::uint64_t e = io_before / m;
  return static_cast<std::size_t>(
      std::min<std::uint64_t>(e, epoch_count == 0 ? 0 : epoch_count - 1));
}

void write_trace_csv(std::ostream& out, std::span<const IoEvent> trace) {
  out << "tick,kind,address\n";
  for (const IoEvent& e : trace) {
    out << e.tick << ',' << (e.kind == IoKind::Read ? "read" : "write") << ','
        << e.address << '\n';
  }
}

std::vector<std::pair<Address, Word>> replay_trace(
    std::vector<std::pair<Address, Word>> initial,
    std::span<const IoEvent> trace) {
  std::map<Address, Word> memory(initial.begin(), initial.end());
  for (const IoEvent& e : trace) {
    if (e.kind == IoKind::Write) {
      memory[e.address] = e.value;
      continue;
    }
    auto it = memory.find(e.address);
    if (it == memory.end() || !(it->second == e.value)) {
      throw AddressError("replay mismatch at tick " + std::to_string(e.tick) +
                         ", address " + std::to_string(e.address));
    }
  }
  return {memory.begin(), memory.end()};
}

}  // namespace iolab::mem
