#include "ltgp/genome.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ltgp/kernels.hpp"

namespace ltgp {

namespace {

std::span<const std::uint8_t> as_bytes(std::span<const Opcode> nodes) {
  return {reinterpret_cast<const std::uint8_t*>(nodes.data()), nodes.size()};
}

Opcode random_leaf(Rng& rng) {
  std::uniform_int_distribution<int> pick(0, kNumLeaves - 1);
  return static_cast<Opcode>(pick(rng));
}

Opcode random_function(Rng& rng) {
  std::uniform_int_distribution<int> pick(kNumLeaves, kNumOpcodes - 1);
  return static_cast<Opcode>(pick(rng));
}

void grow_into(std::vector<Opcode>& out, int depth, int max_depth, InitMethod method, Rng& rng) {
  Opcode op;
  if (depth >= max_depth) {
    op = random_leaf(rng);
  } else if (method == InitMethod::full) {
    op = random_function(rng);
  } else {
    std::uniform_int_distribution<int> pick(0, kNumOpcodes - 1);
    op = static_cast<Opcode>(pick(rng));
  }
  if (!is_leaf(op)) {
    grow_into(out, depth + 1, max_depth, method, rng);
    grow_into(out, depth + 1, max_depth, method, rng);
  }
  out.push_back(op);
}

}  // namespace

std::string_view opcode_name(Opcode op) noexcept {
  switch (op) {
    case Opcode::d0: return "D0";
    case Opcode::d1: return "D1";
    case Opcode::d2: return "D2";
    case Opcode::d3: return "D3";
    case Opcode::d4: return "D4";
    case Opcode::d5: return "D5";
    case Opcode::op_and: return "AND";
    case Opcode::op_or: return "OR";
    case Opcode::op_nand: return "NAND";
    case Opcode::op_nor: return "NOR";
  }
  return "?";
}

Tree::Tree(std::vector<Opcode> nodes) : nodes_(std::move(nodes)) {
  if (auto bad = kernels::first_malformed(bytes())) {
    throw std::invalid_argument("malformed postfix tree at node " + std::to_string(*bad));
  }
}

Tree Tree::adopt_unchecked(std::vector<Opcode> nodes) noexcept {
  Tree t;
  t.nodes_ = std::move(nodes);
  return t;
}

bool is_well_formed(std::span<const Opcode> nodes) { return !kernels::first_malformed(as_bytes(nodes)); }

Tree random_tree(int max_depth, InitMethod method, Rng& rng) {
  if (max_depth < 1) throw std::invalid_argument("random_tree: max_depth must be >= 1");
  std::vector<Opcode> nodes;
  nodes.reserve((std::size_t{2} << std::min(max_depth, 20)) - 1);
  grow_into(nodes, 0, max_depth, method, rng);
  return Tree::adopt_unchecked(std::move(nodes));
}

std::vector<Tree> ramped_half_and_half(std::size_t popsize, int depth_lo, int depth_hi, Rng& rng) {
  if (depth_lo > depth_hi) throw std::invalid_argument("ramped_half_and_half: depth_lo > depth_hi");
  if (popsize < 1) throw std::invalid_argument("ramped_half_and_half: popsize must be >= 1");
  const std::size_t depths = static_cast<std::size_t>(depth_hi - depth_lo + 1);
  std::vector<Tree> trees;
  trees.reserve(popsize);
  for (std::size_t i = 0; i < popsize; ++i) {
    const int depth = depth_lo + static_cast<int>(i % depths);
    const InitMethod method = (i / depths) % 2 == 0 ? InitMethod::full : InitMethod::grow;
    trees.push_back(random_tree(depth, method, rng));
  }
  return trees;
}

SubtreeSpan subtree_span(const Tree& tree, std::size_t node_index) {
  if (node_index >= tree.size()) {
    throw std::out_of_range("subtree_span: node " + std::to_string(node_index) + " out of range for tree of " +
                            std::to_string(tree.size()) + " nodes");
  }
  return {kernels::subtree_start(tree.bytes(), node_index), node_index + 1};
}

std::size_t splice_size(const Tree& mum, std::size_t mum_point, const Tree& dad, std::size_t dad_point) {
  return mum.size() - subtree_span(mum, mum_point).size() + subtree_span(dad, dad_point).size();
}

Tree splice(const Tree& mum, std::size_t mum_point, const Tree& dad, std::size_t dad_point) {
  const SubtreeSpan cut = subtree_span(mum, mum_point);
  const SubtreeSpan graft = subtree_span(dad, dad_point);
  const auto m = mum.nodes();
  const auto d = dad.nodes();
  std::vector<Opcode> child;
  child.reserve(mum.size() - cut.size() + graft.size());
  child.insert(child.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(cut.begin));
  child.insert(child.end(), d.begin() + static_cast<std::ptrdiff_t>(graft.begin),
               d.begin() + static_cast<std::ptrdiff_t>(graft.end));
  child.insert(child.end(), m.begin() + static_cast<std::ptrdiff_t>(cut.end), m.end());
  return Tree::adopt_unchecked(std::move(child));
}

CrossoverPoints pick_crossover_points(const Tree& mum, const Tree& dad, Rng& rng) {
  std::uniform_int_distribution<std::size_t> in_mum(0, mum.size() - 1);
  std::uniform_int_distribution<std::size_t> in_dad(0, dad.size() - 1);
  CrossoverPoints p;
  p.mum = in_mum(rng);
  p.dad = in_dad(rng);
  return p;
}

Tree crossover(const Tree& mum, const Tree& dad, Rng& rng) {
  const CrossoverPoints p = pick_crossover_points(mum, dad, rng);
  return splice(mum, p.mum, dad, p.dad);
}

int tree_depth(const Tree& tree) {
  // Depth of each pending subtree; a function's depth is 1 + max of its two.
  std::vector<int> stack;
  stack.reserve(64);
  for (Opcode op : tree) {
    if (is_leaf(op)) {
      stack.push_back(0);
    } else {
      const int right = stack.back();
      stack.pop_back();
      stack.back() = 1 + std::max(stack.back(), right);
    }
  }
  return stack.empty() ? 0 : stack.back();
}

}  // namespace ltgp
