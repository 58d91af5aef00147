#pragma once

// Per-tree and per-population measurements: constants, introns, effective
// code and its overlap across a population, solution subtrees, runt lineage,
// size-change ratios, whole-tree insertions, size/depth scatter and
// log-decile size histograms.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltgp/genome.hpp"
#include "ltgp/stats.hpp"

namespace ltgp {

// NodeClassification flag bits.
inline constexpr std::uint8_t kNodeConstant = 1U << 0;
inline constexpr std::uint8_t kNodeEffective = 1U << 1;
inline constexpr std::uint8_t kNodeIntron = 1U << 2;
/// With kNodeConstant: the constant is all ones (otherwise all zeros).
inline constexpr std::uint8_t kNodeConstantOnes = 1U << 3;
/// The node's sibling is a constant that fixes their parent's output.
inline constexpr std::uint8_t kNodeSiblingFixes = 1U << 4;

/// Effectiveness is the coarse rule: the root is effective, and children of an
/// effective node are effective unless that node is constant. An intron is a
/// subtree hanging off an effective parent whose output its sibling fixes
/// (AND/NAND with sibling == 0, OR/NOR with sibling == ~0); every node of the
/// subtree carries kNodeIntron.
struct NodeClassification {
  std::vector<std::uint8_t> flags;
  std::uint64_t constant_count = 0;
  std::uint64_t effective_count = 0;
  std::uint64_t intron_count = 0;

  std::size_t size() const noexcept { return flags.size(); }
  bool constant(std::size_t i) const noexcept { return flags[i] & kNodeConstant; }
  bool effective(std::size_t i) const noexcept { return flags[i] & kNodeEffective; }
  bool intron(std::size_t i) const noexcept { return flags[i] & kNodeIntron; }
};

NodeClassification classify_nodes(const Tree& tree);

struct CodeCensus {
  std::uint64_t trees = 0;
  std::uint64_t nodes = 0;
  std::uint64_t constants = 0;
  std::uint64_t introns = 0;
  std::uint64_t effective = 0;

  void add(const NodeClassification& c);
  CodeCensus& operator+=(const CodeCensus& other);
  double constant_fraction() const;
  double effective_fraction() const;
  double mean_effective() const;
  friend bool operator==(const CodeCensus&, const CodeCensus&) = default;
};

CodeCensus population_code_census(std::span<const Tree> trees);

/// Nodes whose output equals the 6-mux target on all 64 cases.
std::size_t count_solution_subtrees(const Tree& tree);

/// Root path of every effective node. A key is the root opcode followed by
/// one byte per step, (side << 4) | opcode with side 0 = left, 1 = right.
std::vector<std::string> effective_paths(const Tree& tree, const NodeClassification& classes);
/// Human-readable form, e.g. "OR R:AND L:D3".
std::string render_path(const std::string& key);

struct EffectiveCodeReport {
  std::vector<std::uint64_t> effective_per_tree;
  double mean_effective = 0.0;
  /// Number of max-fitness trees the overlap was computed over.
  std::uint64_t trees_considered = 0;
  std::map<std::string, std::uint64_t> path_counts;
  /// Paths present in at least ceil(threshold * trees_considered) trees.
  std::uint64_t shared_core = 0;
  double threshold = 0.99;
};

/// Overlap is taken over the trees with the best fitness present; `fitness`
/// parallels `trees`.
EffectiveCodeReport effective_code_overlap(std::span<const Tree> trees, std::span<const int> fitness,
                                           double threshold = 0.99);

struct SizeChangeBin {
  /// Exact change for |change| <= 8, else [lo, hi] with log-decile width.
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::uint64_t count = 0;
};

struct RuntParentReport {
  std::uint64_t events = 0;
  std::optional<double> mum_correlation;
  std::optional<double> dad_correlation;
  std::vector<double> mum_minus_mean;
  double mum_below_mean_fraction = 0.0;
  std::uint64_t smaller_than_mum = 0;
  std::uint64_t larger_than_mum = 0;
  std::uint64_t same_as_mum = 0;
  std::vector<SizeChangeBin> size_change_histogram;
};

/// Uses the events where both parents have fitness 64 and the child less.
RuntParentReport runt_parent_report(std::span<const RuntEvent> events);

/// Histogram bins for signed size changes: exact values within +-8, log-decile
/// bins beyond.
std::vector<SizeChangeBin> size_change_histogram(std::span<const std::int64_t> changes);

struct UpDownRow {
  std::uint64_t runts = 0;
  std::uint64_t rises = 0;
  std::uint64_t falls = 0;
  /// rises / falls; unset when either count is <= 5.
  std::optional<double> ratio;
  bool suppressed() const noexcept { return !ratio.has_value(); }
};

/// Rises and falls of mean size from generation g to g+1, binned by the runt
/// count of generation g, over generations g >= first_convergence.
std::vector<UpDownRow> size_change_vs_runts(std::span<const GenerationStats> log, std::uint64_t first_convergence);

/// First generation in which every individual has fitness 64.
std::optional<std::uint64_t> first_convergence(std::span<const GenerationStats> log);

class WholeTreeInsertionTracker {
 public:
  /// Throws std::invalid_argument for dad_size == 0.
  void record(std::uint64_t dad_size, bool dad_point_at_root);
  WholeTreeInsertionTracker& operator+=(const WholeTreeInsertionTracker& other);
  std::uint64_t events() const noexcept { return events_; }
  std::uint64_t observed() const noexcept { return observed_; }
  double expected() const noexcept { return expected_; }
  /// Binomial-style spread of the observed count, sqrt(sum p(1-p)).
  double sigma() const noexcept;

 private:
  std::uint64_t events_ = 0;
  std::uint64_t observed_ = 0;
  double expected_ = 0.0;
  double variance_ = 0.0;
};

struct SizeDepthPoint {
  std::uint64_t size = 0;
  int depth = 0;
  bool whole_tree = false;
  friend bool operator==(const SizeDepthPoint&, const SizeDepthPoint&) = default;
};

struct ScatterOptions {
  bool include_subtrees = false;
  /// Fraction of proper subtrees reported for ordinary trees.
  double sample_rate = 1.0;
  /// Trees above this size report `huge_tree_samples` random subtree roots.
  std::size_t huge_tree_threshold = 100'000;
  std::size_t huge_tree_samples = 10'000;
};

std::vector<SizeDepthPoint> size_depth_scatter(std::span<const Tree> trees, const ScatterOptions& options, Rng& rng);

/// Probability that a tree size lies in [lo, hi).
using SizeMass = std::function<double(std::uint64_t lo, std::uint64_t hi)>;

struct DecileBin {
  std::uint64_t lo = 0;  // inclusive
  std::uint64_t hi = 0;  // exclusive
  std::uint64_t observed = 0;
  double expected = 0.0;
  double sigma = 0.0;
  /// max(0, observed - expected - 3 sigma)
  double exceedance = 0.0;
  bool flagged() const noexcept { return exceedance > 0.0; }
};

/// Decile bin holding `size`: floor(10 log10 size). Sizes must be >= 1.
int decile_bin_index(std::uint64_t size);
/// Smallest integer size in decile bin `index`.
std::uint64_t decile_bin_lower(int index);

/// Log-decile histogram (10 bins per factor of ten) of `sizes` against the
/// reference mass. Bins without integer sizes are omitted. Throws
/// std::invalid_argument on empty input.
std::vector<DecileBin> decile_histogram_with_exceedance(std::span<const std::uint64_t> sizes, const SizeMass& mass);

}  // namespace ltgp
