#pragma once

// Tree genomes for the Boolean 6-multiplexer: a flat postfix buffer holding
// one byte per node, children before their parent. A 10^8-node tree costs
// 100 MB and every operation below is a linear scan.
//
// Depth is counted in edges: a lone leaf has depth 0.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace ltgp {

using Rng = std::mt19937_64;

enum class Opcode : std::uint8_t {
  d0 = 0,
  d1,
  d2,
  d3,
  d4,
  d5,
  op_and,
  op_or,
  op_nand,
  op_nor,
};

inline constexpr int kNumLeaves = 6;
inline constexpr int kNumFunctions = 4;
inline constexpr int kNumOpcodes = kNumLeaves + kNumFunctions;

constexpr bool is_leaf(Opcode op) noexcept { return static_cast<std::uint8_t>(op) < kNumLeaves; }
constexpr int arity(Opcode op) noexcept { return is_leaf(op) ? 0 : 2; }
constexpr bool is_valid_opcode(std::uint8_t code) noexcept { return code < kNumOpcodes; }
constexpr Opcode leaf(int input) noexcept { return static_cast<Opcode>(input); }
std::string_view opcode_name(Opcode op) noexcept;

/// Half-open node range [begin, end) holding one subtree; its root is end - 1.
struct SubtreeSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  std::size_t root() const noexcept { return end - 1; }
  friend bool operator==(const SubtreeSpan&, const SubtreeSpan&) = default;
};

class Tree {
 public:
  Tree() = default;

  /// Validates postfix well-formedness; throws std::invalid_argument.
  explicit Tree(std::vector<Opcode> nodes);

  /// For builders that produce well-formed buffers by construction.
  static Tree adopt_unchecked(std::vector<Opcode> nodes) noexcept;

  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  Opcode operator[](std::size_t i) const noexcept { return nodes_[i]; }
  Opcode root() const noexcept { return nodes_.back(); }
  std::span<const Opcode> nodes() const noexcept { return nodes_; }
  std::span<const std::uint8_t> bytes() const noexcept {
    return {reinterpret_cast<const std::uint8_t*>(nodes_.data()), nodes_.size()};
  }
  auto begin() const noexcept { return nodes_.begin(); }
  auto end() const noexcept { return nodes_.end(); }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<Opcode> nodes_;
};

bool is_well_formed(std::span<const Opcode> nodes);

enum class InitMethod { grow, full };

/// Random tree no deeper than `max_depth` (full: every leaf exactly there).
/// Grow picks uniformly over all ten opcodes above the depth limit.
Tree random_tree(int max_depth, InitMethod method, Rng& rng);

/// Ramped half-and-half: tree i gets depth lo + i mod (hi-lo+1); alternating
/// blocks of depths use full then grow, so each depth is half full, half grow.
std::vector<Tree> ramped_half_and_half(std::size_t popsize, int depth_lo, int depth_hi, Rng& rng);

/// Throws std::out_of_range if node_index >= tree.size().
SubtreeSpan subtree_span(const Tree& tree, std::size_t node_index);

/// mum with the subtree rooted at mum_point replaced by dad's subtree rooted at
/// dad_point.
Tree splice(const Tree& mum, std::size_t mum_point, const Tree& dad, std::size_t dad_point);

/// Size of splice(mum, mum_point, dad, dad_point) without building it.
std::size_t splice_size(const Tree& mum, std::size_t mum_point, const Tree& dad, std::size_t dad_point);

struct CrossoverPoints {
  std::size_t mum = 0;
  std::size_t dad = 0;
};

/// Both points uniform over all nodes (no function bias).
CrossoverPoints pick_crossover_points(const Tree& mum, const Tree& dad, Rng& rng);

Tree crossover(const Tree& mum, const Tree& dad, Rng& rng);

int tree_depth(const Tree& tree);

}  // namespace ltgp
