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

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "iolab/attention.hpp"
#include "iolab/errors.hpp"
#include "iolab/memory_hierarchy.hpp"

using namespace iolab;
using namespace iolab::mem;

TEST_CASE("create checks capacity and value kind") {
  MemoryHierarchy h(100);
  CHECK(h.capacity() == 100);
  CHECK(h.occupied() == 0);
  CHECK(h.io_count() == 0);
  CHECK(h.trace().empty());
  CHECK_THROWS_AS(MemoryHierarchy(3), ConfigError);
  CHECK_NOTHROW(MemoryHierarchy(4));

  MemoryHierarchy f(16, ValueKind::prime_field(17));
  CHECK(f.value_kind().is_field());
  CHECK(f.value_kind().modulus == 17);
  CHECK_THROWS_AS(ValueKind::prime_field(15), FieldError);
}

TEST_CASE("read after write round trips and counts") {
  MemoryHierarchy h(4);
  const Slot s = h.constant(Word::real(3.5));
  h.write_word(s, 7);
  CHECK(h.io() == IoStats{0, 1});
  CHECK(h.occupied() == 1);  // a write keeps the slot
  h.free_slot(s);
  const Slot r = h.read_word(7);
  CHECK(h.value(r).as_real() == 3.5);
  CHECK(h.io() == IoStats{1, 1});
}

TEST_CASE("reads beyond capacity fail") {
  MemoryHierarchy h(4);
  for (Address a = 0; a < 5; ++a) h.store_input(a, Word::real(static_cast<double>(a)));
  std::vector<Slot> held;
  for (Address a = 0; a < 4; ++a) held.push_back(h.read_word(a));
  CHECK_THROWS_AS(h.read_word(4), CapacityError);
  CHECK(h.io().reads == 4);  // the failed read is not counted
  h.free_slot(held.back());
  CHECK_NOTHROW(h.read_word(4));
  CHECK(h.peak_occupied() == 4);
}

TEST_CASE("uninitialized addresses and empty slots are rejected") {
  MemoryHierarchy h(4);
  CHECK_THROWS_AS(h.read_word(0), AddressError);
  h.store_input(10, Word::real(1.0));
  CHECK_THROWS_AS(h.read_word(9), AddressError);
  const Slot s = h.read_word(10);
  h.free_slot(s);
  CHECK_THROWS_AS(h.free_slot(s), UsageError);
  CHECK_THROWS_AS(h.write_word(s, 0), UsageError);
  CHECK_THROWS_AS(h.value(s), UsageError);
}

TEST_CASE("last write wins and survives eviction") {
  MemoryHierarchy h(4);
  const Slot a = h.constant(Word::real(1.0));
  const Slot b = h.constant(Word::real(2.0));
  h.write_word(a, 0);
  h.write_word(b, 0);
  h.free_slots(std::vector<Slot>{a, b});
  CHECK(h.occupied() == 0);
  CHECK(h.peek_memory(0)->as_real() == 2.0);
  CHECK(h.value(h.read_word(0)).as_real() == 2.0);
}

TEST_CASE("free never changes the counters") {
  MemoryHierarchy h(4);
  h.store_input(0, Word::real(1.0));
  const Slot s = h.read_word(0);
  const IoStats before = h.io();
  h.free_slot(s);
  CHECK(h.io() == before);
  CHECK(h.trace().size() == 1);
}

TEST_CASE("compute in cache is free of I/O") {
  MemoryHierarchy h(8);
  const Slot two = h.constant(Word::real(2.0));
  const Slot three = h.constant(Word::real(3.0));
  const Slot five = h.compute(Op::Add, {two, three});
  CHECK(h.value(five).as_real() == 5.0);
  const Slot z = h.zero();
  const Slot one = h.compute(Op::Exp, {z});
  CHECK(h.value(one).as_real() == 1.0);
  CHECK(h.value(h.compute(Op::MulAdd, {five, two, three})).as_real() == 11.0);
  CHECK(h.value(h.compute(Op::Max, {two, three})).as_real() == 3.0);
  CHECK(h.io_count() == 0);

  h.compute_into(two, Op::Neg, {two});
  CHECK(h.value(two).as_real() == -2.0);
}

TEST_CASE("operands must be resident and of the right arity") {
  MemoryHierarchy h(4);
  const Slot a = h.constant(Word::real(1.0));
  const Slot b = h.constant(Word::real(1.0));
  h.free_slot(b);
  CHECK_THROWS_AS(h.compute(Op::Add, {a, b}), ResidencyError);
  CHECK_THROWS_AS(h.compute(Op::Add, {a}), UsageError);
  CHECK(h.occupied() == 1);
}

TEST_CASE("compute needs a free slot") {
  MemoryHierarchy h(4);
  std::vector<Slot> s;
  for (int i = 0; i < 4; ++i) s.push_back(h.constant(Word::real(1.0)));
  CHECK_THROWS_AS(h.compute(Op::Add, {s[0], s[1]}), CapacityError);
  CHECK_NOTHROW(h.compute_into(s[0], Op::Add, {s[0], s[1]}));
  CHECK(h.value(s[0]).as_real() == 2.0);
}

TEST_CASE("field arithmetic is modular") {
  MemoryHierarchy h(8, ValueKind::prime_field(17));
  const Slot five = h.constant(Word::field(5, 17));
  const Slot seven = h.constant(Word::field(7, 17));
  CHECK(h.value(h.compute(Op::Mul, {five, seven})).residue() == 1);
  CHECK(h.value(h.compute(Op::Sub, {five, seven})).residue() == 15);
  const Slot inv = h.compute(Op::Reciprocal, {five});
  CHECK(h.value(h.compute(Op::Mul, {inv, five})).residue() == 1);
  CHECK(h.value(h.compute(Op::Div, {seven, five})).residue() == (7 * 7) % 17);  // 5^-1 = 7

  const Slot zero = h.zero();
  CHECK_THROWS_AS(h.compute(Op::Reciprocal, {zero}), FieldError);
  CHECK_THROWS_AS(h.compute(Op::Exp, {five}), FieldError);
  CHECK_THROWS_AS(h.compute(Op::Max, {five, seven}), FieldError);
  CHECK_FALSE(h.overflowed());
}

TEST_CASE("words of another kind are rejected") {
  MemoryHierarchy f(8, ValueKind::prime_field(17));
  CHECK_THROWS_AS(f.constant(Word::field(1, 13)), FieldError);
  CHECK_THROWS_AS(f.constant(Word::real(1.0)), FieldError);
  CHECK_THROWS_AS(f.store_input(0, Word::field(1, 13)), FieldError);
  MemoryHierarchy r(8);
  CHECK_THROWS_AS(r.constant(Word::field(1, 17)), FieldError);
  CHECK_THROWS_AS(Word::field(3, 17).as_real(), UsageError);
  CHECK_THROWS_AS(Word::real(3).residue(), UsageError);
}

TEST_CASE("float overflow raises the diagnostic flag") {
  MemoryHierarchy h(4);
  const Slot big = h.constant(Word::real(1000.0));
  CHECK_FALSE(h.overflowed());
  h.compute(Op::Exp, {big});
  CHECK(h.overflowed());
}

TEST_CASE("split_into_epochs is a greedy partition") {
  const auto e = split_into_epochs(10, 4);
  REQUIRE(e.size() == 3);
  CHECK(e[0].io_count() == 4);
  CHECK(e[1].io_count() == 4);
  CHECK(e[2].io_count() == 2);
  CHECK(10 >= (e.size() - 1) * 4);

  const auto empty = split_into_epochs(0, 4);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].io_count() == 0);
  CHECK_THROWS_AS(split_into_epochs(3, 0), ConfigError);

  CHECK(epoch_of(0, 4, 3) == 0);
  CHECK(epoch_of(4, 4, 3) == 1);
  CHECK(epoch_of(10, 4, 3) == 2);
  CHECK(epoch_of(12, 4, 3) == 2);
}

TEST_CASE("epoch partition property over many sizes") {
  for (std::size_t count = 0; count < 60; ++count) {
    for (std::size_t m = 1; m < 12; ++m) {
      const auto e = split_into_epochs(count, m);
      std::size_t expect_begin = 0;
      for (const Epoch& ep : e) {
        CHECK(ep.begin == expect_begin);
        CHECK(ep.io_count() <= m);
        expect_begin = ep.end;
      }
      CHECK(expect_begin == count);
      CHECK(count >= (e.size() - 1) * m);
      // Every epoch but the last is full.
      for (std::size_t i = 0; i + 1 < e.size(); ++i) CHECK(e[i].io_count() == m);
    }
  }
}

TEST_CASE("trace bookkeeping on a real kernel run") {
  std::mt19937_64 rng(7);
  const auto inst = attn::AttentionInstance::random(4, 2, 1.0, rng);
  MemoryHierarchy h(4);
  attn::square_tiling_attention(h, inst);
  const auto& trace = h.trace();
  CHECK(trace.size() == h.io_count());
  std::uint64_t reads = 0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(trace[i].tick == i);
    if (trace[i].kind == IoKind::Read) ++reads;
  }
  CHECK(reads == h.io().reads);
  CHECK(h.peak_occupied() <= 4);
  for (const Epoch& e : split_into_epochs(trace, 4)) CHECK(e.io_count() <= 4);
}

TEST_CASE("replay reproduces the final memory") {
  std::mt19937_64 rng(11);
  const auto inst = attn::AttentionInstance::random(4, 2, 1.0, rng);
  MemoryHierarchy h(16);
  attn::streaming_attention(h, inst);
  std::vector<std::pair<Address, Word>> initial;
  const attn::AttentionLayout layout{4, 2};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t l = 0; l < 2; ++l) {
      initial.emplace_back(layout.q(i, l), Word::real(inst.q(i, l)));
      initial.emplace_back(layout.k(i, l), Word::real(inst.k(i, l)));
      initial.emplace_back(layout.v(i, l), Word::real(inst.v(i, l)));
    }
  }
  const auto replayed = replay_trace(initial, h.trace());
  CHECK(replayed == h.memory_contents());

  // A corrupted initial image is caught at the first read of that address.
  initial.front().second = Word::real(99.0);
  CHECK_THROWS_AS(replay_trace(initial, h.trace()), AddressError);
}

TEST_CASE("trace CSV format") {
  MemoryHierarchy h(4);
  h.store_input(3, Word::real(1.0));
  const Slot s = h.read_word(3);
  h.write_word(s, 5);
  std::ostringstream out;
  write_trace_csv(out, h.trace());
  CHECK(out.str() == "tick,kind,address\n0,read,3\n1,write,5\n");
}

TEST_CASE("property: random op sequences keep occupancy and counters consistent") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 4 + rng() % 8;
    MemoryHierarchy h(m);
    for (Address a = 0; a < 16; ++a) h.store_input(a, Word::real(static_cast<double>(a)));
    std::vector<Slot> live;
    std::uint64_t reads = 0, writes = 0;
    for (int step = 0; step < 200; ++step) {
      const int action = static_cast<int>(rng() % 4);
      if (action == 0) {
        if (live.size() < m) {
          live.push_back(h.read_word(rng() % 16));
          ++reads;
        } else {
          CHECK_THROWS_AS(h.read_word(0), CapacityError);
        }
      } else if (action == 1 && !live.empty()) {
        h.write_word(live[rng() % live.size()], rng() % 16);
        ++writes;
      } else if (action == 2 && !live.empty()) {
        const std::size_t i = rng() % live.size();
        h.free_slot(live[i]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      } else if (action == 3 && live.size() >= 2 && live.size() < m) {
        live.push_back(h.compute(Op::Add, {live[0], live[1]}));
      }
      CHECK(h.occupied() == live.size());
      CHECK(h.occupied() <= m);
    }
    CHECK(h.io() == IoStats{reads, writes});
    CHECK(h.trace().size() == reads + writes);
  }
}
