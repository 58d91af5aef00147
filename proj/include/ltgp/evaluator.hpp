#pragma once

// Sub-machine-code evaluation: bit k of a 64-bit word is a node's output on
// fitness case k, where case k sets input Di to (k >> i) & 1. One postfix pass
// evaluates all 64 cases at once.
//
// 6-mux convention: D0, D1 are the address lines (D0 least significant) and
// D2..D5 the data lines selected by addresses 0..3.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ltgp/genome.hpp"

namespace ltgp {

using CaseVector = std::uint64_t;

inline constexpr int kNumCases = 64;
inline constexpr int kMaxFitness = kNumCases;
inline constexpr CaseVector kAllOnes = ~CaseVector{0};

constexpr CaseVector input_vector(int i) {
  if (i < 0 || i >= kNumLeaves) throw std::out_of_range("input_vector: input index must be 0..5");
  CaseVector v = 0;
  for (int k = 0; k < kNumCases; ++k) v |= CaseVector{(static_cast<unsigned>(k) >> i) & 1U} << k;
  return v;
}

constexpr CaseVector mux6_target() {
  CaseVector v = 0;
  for (int k = 0; k < kNumCases; ++k) {
    const int address = k & 3;
    v |= CaseVector{(static_cast<unsigned>(k) >> (2 + address)) & 1U} << k;
  }
  return v;
}

inline constexpr std::array<CaseVector, kNumLeaves> kInputVectors = {
    input_vector(0), input_vector(1), input_vector(2), input_vector(3), input_vector(4), input_vector(5)};
inline constexpr CaseVector kMux6Target = mux6_target();

constexpr CaseVector apply(Opcode op, CaseVector a, CaseVector b) noexcept {
  switch (op) {
    case Opcode::op_and: return a & b;
    case Opcode::op_or: return a | b;
    case Opcode::op_nand: return ~(a & b);
    case Opcode::op_nor: return ~(a | b);
    default: return kInputVectors[static_cast<std::uint8_t>(op)];
  }
}

constexpr bool is_constant(CaseVector v) noexcept { return v == 0 || v == kAllOnes; }

CaseVector evaluate(const Tree& tree);

constexpr int fitness(CaseVector v) noexcept { return kNumCases - std::popcount(v ^ kMux6Target); }

/// Shannon entropy in bits of the 64-case output, -64 (p log2 p + q log2 q)
/// with p the fraction of true cases and 0 log 0 = 0.
double entropy(CaseVector v) noexcept;

/// Streams each node's CaseVector in postfix order. Memory is one word per
/// pending operand, which is bounded by tree depth + 1.
template <class Consumer>
void node_values(const Tree& tree, Consumer&& consumer) {
  std::vector<CaseVector> stack;
  stack.reserve(64);
  const auto nodes = tree.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Opcode op = nodes[i];
    CaseVector v;
    if (is_leaf(op)) {
      v = kInputVectors[static_cast<std::uint8_t>(op)];
      stack.push_back(v);
    } else {
      const CaseVector b = stack.back();
      stack.pop_back();
      v = apply(op, stack.back(), b);
      stack.back() = v;
    }
    consumer(i, v);
  }
}

/// Per-node values for the whole tree; refuses trees above `max_nodes`
/// (default one million) since that costs 8 bytes per node.
std::vector<CaseVector> materialize_node_values(const Tree& tree, std::size_t max_nodes = 1'000'000);

}  // namespace ltgp
