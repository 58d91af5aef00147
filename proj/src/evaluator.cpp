#include "ltgp/evaluator.hpp"

#include <string>

namespace ltgp {

namespace {

// Per-thread scratch stack so repeated evaluations do not allocate.
std::vector<CaseVector>& scratch() {
  thread_local std::vector<CaseVector> stack(1024);
  return stack;
}

}  // namespace

CaseVector evaluate(const Tree& tree) {
  std::vector<CaseVector>& stack = scratch();
  CaseVector* base = stack.data();
  CaseVector* limit = base + stack.size();
  CaseVector* top = base;  // one past the last pending value
  for (Opcode op : tree) {
    switch (op) {
      case Opcode::op_and:
        top[-2] &= top[-1];
        --top;
        break;
      case Opcode::op_or:
        top[-2] |= top[-1];
        --top;
        break;
      case Opcode::op_nand:
        top[-2] = ~(top[-2] & top[-1]);
        --top;
        break;
      case Opcode::op_nor:
        top[-2] = ~(top[-2] | top[-1]);
        --top;
        break;
      default:
        if (top == limit) {
          const std::size_t used = static_cast<std::size_t>(top - base);
          stack.resize(stack.size() * 2);
          base = stack.data();
          limit = base + stack.size();
          top = base + used;
        }
        *top++ = kInputVectors[static_cast<std::uint8_t>(op)];
        break;
    }
  }
  return top == base ? 0 : top[-1];
}

double entropy(CaseVector v) noexcept {
  const int ones = std::popcount(v);
  if (ones == 0 || ones == kNumCases) return 0.0;
  const double p = static_cast<double>(ones) / kNumCases;
  const double q = 1.0 - p;
  return -kNumCases * (p * std::log2(p) + q * std::log2(q));
}

std::vector<CaseVector> materialize_node_values(const Tree& tree, std::size_t max_nodes) {
  if (tree.size() > max_nodes) {
    throw std::length_error("materialize_node_values: tree of " + std::to_string(tree.size()) +
                            " nodes exceeds limit " + std::to_string(max_nodes));
  }
  std::vector<CaseVector> values(tree.size());
  node_values(tree, [&](std::size_t i, CaseVector v) { values[i] = v; });
  return values;
}

}  // namespace ltgp
