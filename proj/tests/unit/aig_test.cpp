//===----------------------------------------------------------------------===//
//
// Part of the aigen project, under the Apache License v2.0.
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "aigen/aig.hpp"

using namespace aigen;

namespace {

// Three-gate reference network: o1 = (x1 AND x2) AND (x2 AND x3).
Aig chain_example() {
  Aig g(3);
  const Literal a1 = g.add_and(g.input_literal(1), g.input_literal(2));
  const Literal a2 = g.add_and(g.input_literal(2), g.input_literal(3));
  g.add_output(g.add_and(a1, a2));
  return g;
}

Aig random_aig(uint32_t n_inputs, uint32_t n_gates, uint32_t n_outputs, std::mt19937& rng) {
  Aig g(n_inputs);
  for (uint32_t i = 0; i < n_gates; ++i) {
    const uint32_t hi = g.n_nodes() - 1;
    const Literal a(1 + rng() % hi, rng() & 1);
    const Literal b(1 + rng() % hi, rng() & 1);
    g.add_and_raw(a, b);
  }
  for (uint32_t i = 0; i < n_outputs; ++i)
    g.add_output(Literal(1 + rng() % (g.n_nodes() - 1), rng() & 1));
  return g;
}

}  // namespace

TEST_CASE("literals pack node and inversion as 2n+inv", "[aig]") {
  CHECK(Literal(5, false).raw() == 10u);
  CHECK(Literal(5, true).raw() == 11u);
  CHECK((!Literal(5, false)) == Literal(5, true));
  CHECK((Literal(5, false) ^ true) == Literal(5, true));
  CHECK((Literal(5, true) ^ true) == Literal(5, false));
  CHECK(Literal::const_false().raw() == 0u);
  CHECK(Literal::const_true().raw() == 1u);
  Aig g(4);
  CHECK(g.input_literal(3).raw() == 6u);
  CHECK_THROWS_AS(g.input_literal(5), std::out_of_range);
  CHECK_THROWS_AS(g.input_literal(0), std::out_of_range);
}

TEST_CASE("structural hashing merges commutatively equal gates", "[aig]") {
  Aig g(2);
  const Literal x1 = g.input_literal(1), x2 = g.input_literal(2);
  const Literal a = g.add_and(x1, x2);
  CHECK(g.add_and(x1, x2) == a);
  CHECK(g.add_and(x2, x1) == a);
  CHECK(g.n_ands() == 1);
  CHECK(g.add_and(!x1, x2) != a);
  CHECK(g.n_ands() == 2);
  // add_and_raw never merges.
  g.add_and_raw(x1, x2);
  CHECK(g.n_ands() == 3);
}

TEST_CASE("gate counting ignores unreachable nodes", "[aig]") {
  Aig g = chain_example();
  CHECK(g.count_ands() == 3);
  CHECK(g.n_ands() == 3);
  // A dangling gate inflates n_ands but not the reachable count.
  g.add_and(g.input_literal(1), g.input_literal(3));
  CHECK(g.n_ands() == 4);
  CHECK(g.count_ands() == 3);
}

TEST_CASE("traversal size re-expands shared cones", "[aig]") {
  // Fan-out-free chain: 3 gates + 4 leaf visits = 7 tokens.
  CHECK(chain_example().traversal_size() == 7);

  Aig g(2);
  const Literal a = g.add_and(g.input_literal(1), g.input_literal(2));
  const Literal b = g.add_and(a, !a);  // shared child counted twice
  g.add_output(b);
  CHECK(g.traversal_size() == 7);
  CHECK(g.count_ands() == 2);

  // Each output traverses its own cone independently.
  Aig h(2);
  const Literal c = h.add_and(h.input_literal(1), h.input_literal(2));
  h.add_output(c);
  h.add_output(!c);
  h.add_output(h.input_literal(1));
  CHECK(h.traversal_size() == 3 + 3 + 1);
}

TEST_CASE("depth is the longest gate path", "[aig]") {
  CHECK(chain_example().depth() == 2);
  Aig g(2);
  Literal l = g.input_literal(1);
  for (int i = 0; i < 5; ++i) l = g.add_and_raw(l, g.input_literal(2));
  g.add_output(l);
  CHECK(g.depth() == 5);
  Aig h(1);
  h.add_output(h.input_literal(1));
  CHECK(h.depth() == 0);
}

TEST_CASE("chain example computes the conjunction of all inputs", "[aig]") {
  const auto tables = chain_example().eval_truth_tables();
  REQUIRE(tables.size() == 1);
  CHECK(tables[0].to_string() == "00000001");
}

TEST_CASE("bit-parallel evaluation matches the recursive scalar path", "[aig]") {
  std::mt19937 rng(19);
  for (int rep = 0; rep < 25; ++rep) {
    const uint32_t n = 1 + rng() % 6;
    const Aig g = random_aig(n, 1 + rng() % 12, 1 + rng() % 3, rng);
    const auto tables = g.eval_truth_tables();
    REQUIRE(tables.size() == g.n_outputs());
    for (size_t o = 0; o < tables.size(); ++o)
      for (uint64_t row = 0; row < tables[o].n_rows(); ++row)
        REQUIRE(tables[o].bit(row) == g.eval_row(g.outputs()[o], row));
  }
}

TEST_CASE("constant and inverted output literals evaluate correctly", "[aig]") {
  Aig g(2);
  g.add_output(Literal::const_false());
  g.add_output(Literal::const_true());
  g.add_output(!g.input_literal(2));
  const auto tables = g.eval_truth_tables();
  CHECK(tables[0].to_string() == "0000");
  CHECK(tables[1].to_string() == "1111");
  CHECK(tables[2].to_string() == "1100");
}
