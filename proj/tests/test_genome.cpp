#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "ltgp/genome.hpp"
#include "ltgp/theory.hpp"
#include "oracles.hpp"

using namespace ltgp;

namespace {

Tree T(std::initializer_list<Opcode> ops) { return Tree(std::vector<Opcode>(ops)); }

constexpr Opcode D0 = Opcode::d0, D1 = Opcode::d1, D2 = Opcode::d2, D3 = Opcode::d3, AND = Opcode::op_and;

}  // namespace

TEST_CASE("Tree rejects malformed postfix") {
  CHECK_THROWS_AS(Tree(std::vector<Opcode>{}), std::invalid_argument);
  CHECK_THROWS_AS(Tree(std::vector<Opcode>{D0, D1}), std::invalid_argument);
  CHECK_THROWS_AS(Tree(std::vector<Opcode>{AND}), std::invalid_argument);
  CHECK_NOTHROW(T({D0, D1, AND}));
}

TEST_CASE("random_tree full and grow") {
  Rng rng(1);
  CHECK_THROWS_AS(random_tree(0, InitMethod::full, rng), std::invalid_argument);
  const Tree one = random_tree(1, InitMethod::full, rng);
  CHECK(one.size() == 3);
  CHECK(tree_depth(one) == 1);
  CHECK(random_tree(6, InitMethod::full, rng).size() == 127);

  double total = 0;
  for (int i = 0; i < 10'000; ++i) {
    const Tree t = random_tree(6, InitMethod::grow, rng);
    REQUIRE(is_well_formed(t.nodes()));
    REQUIRE(tree_depth(t) <= 6);
    total += static_cast<double>(t.size());
  }
  CHECK(total / 10'000 < 127.0);
}

TEST_CASE("full trees have every leaf at the depth limit") {
  Rng rng(2);
  const Tree t = random_tree(4, InitMethod::full, rng);
  const auto e = oracle::explicit_tree(t);
  for (int i = 0; i < static_cast<int>(e.size()); ++i) {
    if (e.left[i] >= 0) continue;
    int d = 0;
    for (int p = e.parent[i]; p >= 0; p = e.parent[p]) ++d;
    CHECK(d == 4);
  }
}

TEST_CASE("ramped_half_and_half") {
  Rng rng(3);
  const auto pop = ramped_half_and_half(500, 2, 6, rng);
  REQUIRE(pop.size() == 500);
  int max_depth = 0;
  std::map<int, int> full_counts;
  for (const Tree& t : pop) {
    max_depth = std::max(max_depth, tree_depth(t));
    for (int d = 2; d <= 6; ++d) full_counts[d] += t.size() == (std::size_t{2} << d) - 1;
  }
  CHECK(max_depth == 6);
  for (int d = 2; d <= 6; ++d) CHECK(full_counts[d] >= 50);

  const auto small = ramped_half_and_half(10, 2, 2, rng);
  for (std::size_t i = 0; i < small.size(); ++i) {
    CHECK(tree_depth(small[i]) <= 2);
    if ((i / 1) % 2 == 0) CHECK(small[i].size() == 7);  // one depth: even slots are full
  }
  CHECK_THROWS_AS(ramped_half_and_half(10, 3, 2, rng), std::invalid_argument);
}

TEST_CASE("subtree_span examples and bounds") {
  const Tree t = T({D0, D1, AND});
  CHECK(subtree_span(t, 2) == SubtreeSpan{0, 3});
  CHECK(subtree_span(t, 0) == SubtreeSpan{0, 1});
  CHECK(subtree_span(t, 1) == SubtreeSpan{1, 2});
  CHECK_THROWS_AS(subtree_span(t, 3), std::out_of_range);
}

TEST_CASE("subtree_span matches the structural oracle on a 1001-node tree") {
  Rng rng(4);
  const Tree t = uniform_random_binary_tree(500, rng);
  REQUIRE(t.size() == 1001);
  const auto e = oracle::explicit_tree(t);
  std::vector<SubtreeSpan> spans;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const SubtreeSpan s = subtree_span(t, i);
    REQUIRE(s.begin == static_cast<std::size_t>(oracle::first_descendant(e, static_cast<int>(i))));
    REQUIRE(s.size() == static_cast<std::size_t>(oracle::subtree_size(e, static_cast<int>(i))));
    REQUIRE(is_well_formed(t.nodes().subspan(s.begin, s.size())));
    spans.push_back(s);
  }
  for (std::size_t a = 0; a < spans.size(); a += 17) {
    for (std::size_t b = 0; b < spans.size(); ++b) {
      const bool disjoint = spans[a].end <= spans[b].begin || spans[b].end <= spans[a].begin;
      const bool a_in_b = spans[b].begin <= spans[a].begin && spans[a].end <= spans[b].end;
      const bool b_in_a = spans[a].begin <= spans[b].begin && spans[b].end <= spans[a].end;
      REQUIRE((disjoint || a_in_b || b_in_a));
    }
  }
}

TEST_CASE("crossover examples") {
  Rng rng(5);
  CHECK(crossover(T({D0}), T({D3}), rng) == T({D3}));
  CHECK(splice(T({D0, D1, AND}), 0, T({D2}), 0) == T({D2, D1, AND}));
  const Tree mum = T({D0, D1, AND});
  const Tree dad = T({D2, D3, AND, D0, AND});
  CHECK(splice(mum, 2, dad, 4) == dad);
  CHECK(splice(mum, 2, dad, 2) == T({D2, D3, AND}));
}

TEST_CASE("crossover size arithmetic, well-formedness and root donation") {
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const Tree mum = uniform_random_binary_tree(static_cast<std::uint64_t>(trial % 60), rng);
    const Tree dad = uniform_random_binary_tree(static_cast<std::uint64_t>(trial % 37), rng);
    const CrossoverPoints p = pick_crossover_points(mum, dad, rng);
    const Tree child = splice(mum, p.mum, dad, p.dad);
    REQUIRE(is_well_formed(child.nodes()));
    const std::size_t expected =
        mum.size() - subtree_span(mum, p.mum).size() + subtree_span(dad, p.dad).size();
    REQUIRE(child.size() == expected);
    REQUIRE(child.size() == splice_size(mum, p.mum, dad, p.dad));
    if (p.mum + 1 != mum.size()) REQUIRE(child.root() == mum.root());
  }
}

TEST_CASE("crossover points are uniform over nodes") {
  Rng rng(7);
  const Tree mum = oracle::parse("AND(OR(D0,D1),NAND(D2,NOR(D3,D4)))");
  const Tree dad = oracle::parse("OR(D5,D1)");
  const int trials = 90'000;
  std::vector<int> mum_hits(mum.size()), dad_hits(dad.size());
  for (int i = 0; i < trials; ++i) {
    const CrossoverPoints p = pick_crossover_points(mum, dad, rng);
    ++mum_hits[p.mum];
    ++dad_hits[p.dad];
  }
  auto check_uniform = [&](const std::vector<int>& hits) {
    const double p = 1.0 / static_cast<double>(hits.size());
    const double sigma = std::sqrt(trials * p * (1 - p));
    for (int h : hits) CHECK(std::abs(h - trials * p) < 3 * sigma + 1);
  };
  check_uniform(mum_hits);
  check_uniform(dad_hits);
}

TEST_CASE("crossover child size distribution matches exhaustive enumeration") {
  const Tree mum = oracle::parse("AND(OR(D0,D1),NAND(D2,NOR(D3,AND(D4,D5))))");
  const Tree dad = oracle::parse("OR(AND(D5,D1),D2)");
  // Oracle: enumerate every (mum point, dad point) pair.
  std::map<std::size_t, double> expected;
  for (std::size_t m = 0; m < mum.size(); ++m) {
    for (std::size_t d = 0; d < dad.size(); ++d) {
      const auto e_m = oracle::explicit_tree(mum);
      const auto e_d = oracle::explicit_tree(dad);
      const int size = static_cast<int>(mum.size()) - oracle::subtree_size(e_m, static_cast<int>(m)) +
                       oracle::subtree_size(e_d, static_cast<int>(d));
      expected[static_cast<std::size_t>(size)] += 1.0 / static_cast<double>(mum.size() * dad.size());
    }
  }
  Rng rng(8);
  const int trials = 100'000;
  std::map<std::size_t, int> observed;
  for (int i = 0; i < trials; ++i) ++observed[crossover(mum, dad, rng).size()];
  for (const auto& [size, p] : expected) {
    const double sigma = std::sqrt(trials * p * (1 - p));
    CHECK(std::abs(observed[size] - trials * p) < 3 * sigma + 1);
  }
  for (const auto& [size, count] : observed) CHECK(expected.count(size) == 1);
}

TEST_CASE("single-leaf populations are closed under crossover") {
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const Tree child = crossover(Tree({leaf(i % 6)}), Tree({leaf((i / 6) % 6)}), rng);
    REQUIRE(child.size() == 1);
  }
}

TEST_CASE("tree_depth matches the recursive oracle") {
  CHECK(tree_depth(T({D0})) == 0);
  CHECK(tree_depth(T({D0, D1, AND})) == 1);
  Rng rng(10);
  for (int i = 0; i < 300; ++i) {
    const Tree t = uniform_random_binary_tree(static_cast<std::uint64_t>(i % 250), rng);
    const auto e = oracle::explicit_tree(t);
    REQUIRE(tree_depth(t) == oracle::depth(e, e.root));
  }
}

TEST_CASE("opcode metadata") {
  CHECK(is_leaf(Opcode::d5));
  CHECK_FALSE(is_leaf(Opcode::op_nor));
  CHECK(arity(Opcode::op_or) == 2);
  CHECK(opcode_name(Opcode::op_nand) == "NAND");
  CHECK(is_valid_opcode(9));
  CHECK_FALSE(is_valid_opcode(10));
}
