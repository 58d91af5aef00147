#pragma once

// Closed-form reference curves: fitness-using tournaments, the limiting size
// distribution of fitness-free subtree crossover, the mean height of random
// binary trees, and the popsize x core-code bloat estimate. Binary functions
// only (arity 2).

#include <cstdint>
#include <span>
#include <vector>

#include "ltgp/genome.hpp"

namespace ltgp {

struct TheoryParams {
  int arity = 2;
  /// Probability a node is internal; < 1/arity for a normalizable distribution.
  double p_internal = 0.0;
  std::uint64_t popsize = 500;
  int tournament_size = 7;
  std::uint64_t core_size = 0;
  double mean_size = 1.0;
};

/// Expected number of the 2P parent tournaments that contain at least one of
/// x runts: 2P (1 - (1 - x/P)^k). Throws std::invalid_argument unless 0 <= x <= P.
double expected_fitness_tournaments(double runts, double popsize, int tournament_size);

/// Galton-Watson law of a tree grown by making each node internal with
/// probability p: Pr{n internal} = Catalan(n) p^n (1-p)^(n+1), mean size
/// 1/(1-2p). Throws std::invalid_argument unless 0 <= p < 1/2.
double log_branching_size_pmf(std::uint64_t n_internal, double p_internal);
double branching_size_pmf(std::uint64_t n_internal, double p_internal);

/// Limiting size distribution of fitness-free subtree crossover with uniform
/// crossover points (Lagrange distribution of the second kind, arity 2):
/// Pr{n internal} = (1-2p) C(2n+1, n) p^n (1-p)^(n+1), which is the branching
/// law biased by size 2n+1. Throws std::invalid_argument unless 0 <= p < 1/2.
double log_limiting_size_pmf(std::uint64_t n_internal, double p_internal);
double limiting_size_pmf(std::uint64_t n_internal, double p_internal);

/// The same distribution indexed by total node count; 0 for even sizes.
double limiting_size_pmf_by_nodes(std::uint64_t nodes, double p_internal);

/// Mean total node count of the limiting distribution, 1/u^2 + 1/u - 1 with
/// u = 1 - 2p.
double limiting_mean_nodes(double p_internal);

class LimitingSizeDistribution {
 public:
  explicit LimitingSizeDistribution(double p_internal);
  static LimitingSizeDistribution fit_to_mean(double mean_nodes);

  double p_internal() const noexcept { return p_; }
  double mean_nodes() const noexcept;
  /// Probability that the total node count lies in [lo, hi).
  double mass(std::uint64_t lo, std::uint64_t hi) const;

 private:
  double p_;
};

/// p whose branching law has the given mean node count, (mean-1) / (2 mean).
/// Throws for mean < 1.
double fit_pa_from_mean(double mean_nodes);

/// p whose limiting distribution has the given mean node count. Throws for
/// mean < 1.
double limiting_pa_from_mean(double mean_nodes);

/// Asymptotic mean height 2 sqrt(pi n) of uniform random binary trees with n
/// internal nodes. Throws std::invalid_argument for n < 1.
double flajolet_expected_depth(std::uint64_t n_internal);

/// Grows a binary tree shape one internal node at a time (Remy's procedure):
/// each step picks one of the 2k+1 current nodes and a side, and inserts a new
/// internal node above it with a new leaf on that side. Uniform choices give
/// a uniform shape over all Catalan(n) trees.
class RemyBuilder {
 public:
  explicit RemyBuilder(std::uint64_t reserve_internal = 0);
  std::uint64_t node_count() const noexcept { return left_.size(); }
  std::uint64_t internal_count() const noexcept { return (left_.size() - 1) / 2; }
  /// `node` < node_count(); new_leaf_left puts the new leaf as left child.
  void grow(std::uint64_t node, bool new_leaf_left);
  /// Postfix tree; leaves and functions labelled by the callbacks.
  template <class LeafLabel, class FunctionLabel>
  Tree to_tree(LeafLabel&& leaf_label, FunctionLabel&& function_label) const;
  /// Postfix tree with every leaf D0 and every function AND.
  Tree shape() const;

 private:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::vector<std::uint32_t> left_;
  std::vector<std::uint32_t> right_;
  std::vector<std::uint32_t> parent_;
  std::uint32_t root_ = 0;
};

/// Uniform over shapes with n internal nodes; opcodes uniform within leaves
/// and within functions.
Tree uniform_random_binary_tree(std::uint64_t n_internal, Rng& rng);

std::uint64_t bloat_limit_estimate(std::uint64_t popsize, std::uint64_t core_size);

template <class LeafLabel, class FunctionLabel>
Tree RemyBuilder::to_tree(LeafLabel&& leaf_label, FunctionLabel&& function_label) const {
  std::vector<Opcode> out;
  out.reserve(left_.size());
  // Iterative postorder; the second visit of a node emits it.
  std::vector<std::pair<std::uint32_t, bool>> stack;
  stack.reserve(64);
  stack.emplace_back(root_, false);
  while (!stack.empty()) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (left_[node] == kNone) {
      out.push_back(leaf_label());
    } else if (expanded) {
      out.push_back(function_label());
    } else {
      stack.emplace_back(node, true);
      stack.emplace_back(right_[node], false);
      stack.emplace_back(left_[node], false);
    }
  }
  return Tree::adopt_unchecked(std::move(out));
}

}  // namespace ltgp
