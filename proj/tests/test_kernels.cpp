#include "doctest.h"

#include <random>
#include <vector>

#include "ltgp/genome.hpp"
#include "ltgp/kernels.hpp"
#include "ltgp/theory.hpp"

using namespace ltgp;
using ltgp::kernels::Isa;

namespace {

std::vector<std::uint8_t> bytes_of(const Tree& t) { return {t.bytes().begin(), t.bytes().end()}; }

}  // namespace

TEST_CASE("avx2 dispatch is available or falls back") {
  const Isa before = kernels::active_isa();
  kernels::force_isa(Isa::avx2);
  CHECK(kernels::active_isa() == (kernels::avx2_supported() ? Isa::avx2 : Isa::scalar));
  kernels::force_isa(Isa::scalar);
  CHECK(kernels::active_isa() == Isa::scalar);
  kernels::force_isa(before);
}

TEST_CASE("subtree_start: scalar and avx2 agree on every node of random trees") {
  Rng rng(11);
  for (std::uint64_t n : {0ULL, 1ULL, 5ULL, 40ULL, 300ULL, 20'000ULL}) {
    const Tree t = uniform_random_binary_tree(n, rng);
    const auto b = t.bytes();
    const std::size_t stride = t.size() > 5000 ? 7 : 1;
    for (std::size_t i = 0; i < t.size(); i += stride) {
      REQUIRE(kernels::scalar::subtree_start(b, i) == kernels::avx2::subtree_start(b, i));
    }
    CHECK(kernels::avx2::subtree_start(b, t.size() - 1) == 0);
  }
}

TEST_CASE("subtree_start: deep left spine exercises block skipping") {
  // ((((D0 D0 AND) D0 AND) ...) : the root subtree has depth-sized pending counts
  // when scanned backwards from a right-spine tree.
  std::vector<Opcode> nodes;
  const int depth = 500;
  for (int i = 0; i < depth; ++i) nodes.push_back(Opcode::d1);
  nodes.push_back(Opcode::d2);
  for (int i = 0; i < depth; ++i) nodes.push_back(Opcode::op_or);
  const Tree t(nodes);
  for (std::size_t i = 0; i < t.size(); ++i) {
    REQUIRE(kernels::scalar::subtree_start(t.bytes(), i) == kernels::avx2::subtree_start(t.bytes(), i));
  }
  CHECK(kernels::avx2::subtree_start(t.bytes(), t.size() - 1) == 0);
}

TEST_CASE("subtree_start reports kNotFound when the buffer ends early") {
  const std::vector<std::uint8_t> fragment = {0, 1, 6, 6};
  CHECK(kernels::scalar::subtree_start(fragment, 3) == kernels::kNotFound);
  CHECK(kernels::avx2::subtree_start(fragment, 3) == kernels::kNotFound);
}

TEST_CASE("first_malformed: scalar and avx2 agree on valid and corrupted buffers") {
  Rng rng(5);
  std::uniform_int_distribution<int> any_byte(0, 255);
  std::uniform_int_distribution<int> opcode(0, 9);
  for (int trial = 0; trial < 400; ++trial) {
    const Tree t = uniform_random_binary_tree(static_cast<std::uint64_t>(trial * 13 % 700), rng);
    std::vector<std::uint8_t> b = bytes_of(t);
    REQUIRE_FALSE(kernels::scalar::first_malformed(b));
    REQUIRE_FALSE(kernels::avx2::first_malformed(b));
    std::uniform_int_distribution<std::size_t> at(0, b.size() - 1);
    switch (trial % 4) {
      case 0: b[at(rng)] = static_cast<std::uint8_t>(any_byte(rng)); break;
      case 1: b[at(rng)] = static_cast<std::uint8_t>(opcode(rng)); break;
      case 2: b.resize(at(rng)); break;
      case 3: b.insert(b.begin() + static_cast<std::ptrdiff_t>(at(rng)), static_cast<std::uint8_t>(opcode(rng))); break;
    }
    REQUIRE(kernels::scalar::first_malformed(b) == kernels::avx2::first_malformed(b));
  }
}

TEST_CASE("first_malformed offsets") {
  using V = std::vector<std::uint8_t>;
  CHECK(kernels::scalar::first_malformed(V{}) == 0);
  CHECK(kernels::avx2::first_malformed(V{}) == 0);
  CHECK(kernels::avx2::first_malformed(V{6}) == 0);
  CHECK(kernels::avx2::first_malformed(V{0, 1}) == 2);
  CHECK(kernels::avx2::first_malformed(V{0, 1, 6, 10}) == 3);
  CHECK(kernels::avx2::first_malformed(V{0, 200, 6}) == 1);
  CHECK_FALSE(kernels::avx2::first_malformed(V{0, 1, 6}));
  // A long run of leaves pushes the counter over the block threshold; an
  // invalid byte buried inside a block must still be located exactly.
  V leaves(100, 3);
  leaves[70] = 42;
  CHECK(kernels::scalar::first_malformed(leaves) == 70);
  CHECK(kernels::avx2::first_malformed(leaves) == 70);
}

TEST_CASE("count_leaves: scalar and avx2 agree") {
  Rng rng(3);
  for (std::uint64_t n : {0ULL, 10ULL, 31ULL, 32ULL, 1000ULL}) {
    const Tree t = uniform_random_binary_tree(n, rng);
    CHECK(kernels::scalar::count_leaves(t.bytes()) == n + 1);
    CHECK(kernels::avx2::count_leaves(t.bytes()) == n + 1);
  }
}
