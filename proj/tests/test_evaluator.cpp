#include "doctest.h"

#include <bit>
#include <vector>

#include "ltgp/evaluator.hpp"
#include "ltgp/theory.hpp"
#include "oracles.hpp"

using namespace ltgp;

TEST_CASE("input vectors") {
  CHECK(input_vector(0) == 0xAAAAAAAAAAAAAAAAULL);
  CHECK(input_vector(5) == 0xFFFFFFFF00000000ULL);
  for (int i = 0; i < kNumLeaves; ++i) CHECK(std::popcount(input_vector(i)) == 32);
  CHECK_THROWS_AS(input_vector(6), std::out_of_range);
  CHECK_THROWS_AS(input_vector(-1), std::out_of_range);
}

TEST_CASE("mux6 target") {
  std::uint64_t brute = 0;
  int ones = 0;
  for (int k = 0; k < 64; ++k) {
    brute |= std::uint64_t{oracle::mux6(k)} << k;
    ones += oracle::mux6(k);
    if ((k & 3) == 0) CHECK(((kMux6Target >> k) & 1) == ((k >> 2) & 1));
  }
  CHECK(kMux6Target == brute);
  CHECK(ones == 32);
  CHECK(std::popcount(kMux6Target) == 32);
  const CaseVector a0 = input_vector(0), a1 = input_vector(1);
  const CaseVector identity = (~a1 & ~a0 & input_vector(2)) | (~a1 & a0 & input_vector(3)) |
                              (a1 & ~a0 & input_vector(4)) | (a1 & a0 & input_vector(5));
  CHECK(kMux6Target == identity);
  CHECK(evaluate(oracle::correct_mux()) == kMux6Target);
}

TEST_CASE("evaluate examples") {
  CHECK(evaluate(Tree({Opcode::d0})) == input_vector(0));
  CHECK(evaluate(Tree({Opcode::d0, Opcode::d0, Opcode::op_nand})) == 0x5555555555555555ULL);
}

TEST_CASE("evaluate equals the per-case interpreter on random trees") {
  Rng rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tree t = trial % 2 ? uniform_random_binary_tree(static_cast<std::uint64_t>(trial % 500), rng)
                             : random_tree(1 + trial % 8, InitMethod::grow, rng);
    const auto e = oracle::explicit_tree(t);
    REQUIRE(evaluate(t) == oracle::eval_all_cases(e, e.root));
  }
}

TEST_CASE("fitness") {
  CHECK(fitness(kMux6Target) == 64);
  CHECK(fitness(~kMux6Target) == 0);
  CHECK(fitness(kMux6Target ^ (1ULL << 17)) == 63);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const int f = fitness(rng());
    CHECK(f >= 0);
    CHECK(f <= 64);
  }
}

TEST_CASE("entropy") {
  CHECK(entropy(0) == 0.0);
  CHECK(entropy(kAllOnes) == 0.0);
  for (int i = 0; i < kNumLeaves; ++i) CHECK(entropy(input_vector(i)) == 64.0);
  CHECK(entropy(evaluate(Tree({Opcode::d0, Opcode::d1, Opcode::op_and}))) == doctest::Approx(51.92).epsilon(0.01 / 51.92));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const CaseVector v = rng() & rng();
    const double s = entropy(v);
    CHECK(s >= 0.0);
    CHECK(s <= 64.0);
    CHECK((s == 0.0) == is_constant(v));
    CHECK((s == 64.0) == (std::popcount(v) == 32));
  }
}

TEST_CASE("functions of two constants are constant") {
  for (CaseVector a : {CaseVector{0}, kAllOnes}) {
    for (CaseVector b : {CaseVector{0}, kAllOnes}) {
      for (Opcode op : {Opcode::op_and, Opcode::op_or, Opcode::op_nand, Opcode::op_nor}) {
        CHECK(is_constant(apply(op, a, b)));
      }
    }
  }
}

TEST_CASE("node_values streams per-node values") {
  std::vector<CaseVector> seen;
  node_values(Tree({Opcode::d0, Opcode::d1, Opcode::op_and}), [&](std::size_t, CaseVector v) { seen.push_back(v); });
  CHECK(seen == std::vector<CaseVector>{input_vector(0), input_vector(1), input_vector(0) & input_vector(1)});

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Tree t = uniform_random_binary_tree(static_cast<std::uint64_t>(trial), rng);
    const auto e = oracle::explicit_tree(t);
    std::size_t expected_index = 0;
    CaseVector last = 0;
    node_values(t, [&](std::size_t i, CaseVector v) {
      REQUIRE(i == expected_index++);
      REQUIRE(v == oracle::eval_all_cases(e, static_cast<int>(i)));
      last = v;
    });
    CHECK(last == evaluate(t));
    CHECK(materialize_node_values(t).back() == last);
  }
}

TEST_CASE("materialize_node_values refuses large trees") {
  Rng rng(4);
  const Tree t = uniform_random_binary_tree(100, rng);
  CHECK_THROWS_AS(materialize_node_values(t, 100), std::length_error);
  CHECK(materialize_node_values(t, 201).size() == 201);
}

TEST_CASE("constant-headed subtrees can be swapped for equal constants") {
  Rng rng(5);
  const Tree zero = oracle::parse("AND(D3,NOR(D3,D3))");
  const Tree one = oracle::parse("OR(D1,NAND(D1,D1))");
  REQUIRE(evaluate(zero) == 0);
  REQUIRE(evaluate(one) == kAllOnes);
  const Tree other_zero = oracle::parse("NOR(D5,OR(D0,NOR(D0,D0)))");
  const Tree other_one = oracle::parse("NAND(D2,AND(D4,NOR(D4,D4)))");
  REQUIRE(evaluate(other_zero) == 0);
  REQUIRE(evaluate(other_one) == kAllOnes);
  int swaps = 0;
  for (int trial = 0; trial < 3000 && swaps < 300; ++trial) {
    Tree t = uniform_random_binary_tree(static_cast<std::uint64_t>(20 + trial % 200), rng);
    t = splice(t, rng() % t.size(), trial % 2 ? zero : one, 0);
    const auto values = materialize_node_values(t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!is_constant(values[i]) || is_leaf(t[i])) continue;
      const Tree replacement = values[i] == 0 ? other_zero : other_one;
      const Tree swapped = splice(t, i, replacement, replacement.size() - 1);
      REQUIRE(fitness(evaluate(swapped)) == fitness(evaluate(t)));
      ++swaps;
    }
  }
  CHECK(swaps > 0);
}
