#include "ltgp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ltgp/evaluator.hpp"

namespace ltgp {

namespace {

// Top-down context handed from a node to its children.
constexpr std::uint8_t kCtxEffective = 1U << 0;        // child is effective
constexpr std::uint8_t kCtxParentEffective = 1U << 1;  // parent is effective
constexpr std::uint8_t kCtxInIntron = 1U << 2;         // inside an intron subtree

bool fixes(Opcode parent, CaseVector sibling) {
  switch (parent) {
    case Opcode::op_and:
    case Opcode::op_nand: return sibling == 0;
    case Opcode::op_or:
    case Opcode::op_nor: return sibling == kAllOnes;
    default: return false;
  }
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

NodeClassification classify_nodes(const Tree& tree) {
  NodeClassification out;
  const std::size_t n = tree.size();
  out.flags.assign(n, 0);
  if (n == 0) return out;
  const auto nodes = tree.nodes();

  // Bottom-up: constants, and which children have a fixing sibling.
  struct Pending {
    CaseVector value;
    std::size_t index;
  };
  std::vector<Pending> stack;
  stack.reserve(64);
  for (std::size_t i = 0; i < n; ++i) {
    const Opcode op = nodes[i];
    if (is_leaf(op)) {
      stack.push_back({kInputVectors[static_cast<std::uint8_t>(op)], i});
      continue;
    }
    const Pending right = stack.back();
    stack.pop_back();
    const Pending left = stack.back();
    const CaseVector v = apply(op, left.value, right.value);
    if (fixes(op, right.value)) out.flags[left.index] |= kNodeSiblingFixes;
    if (fixes(op, left.value)) out.flags[right.index] |= kNodeSiblingFixes;
    if (is_constant(v)) out.flags[i] |= kNodeConstant | (v == kAllOnes ? kNodeConstantOnes : 0);
    stack.back() = {v, i};
  }

  // Top-down over reverse postfix: the root, then its right subtree, then its
  // left. Both children share a context so push order does not matter.
  std::vector<std::uint8_t> contexts;
  contexts.reserve(64);
  contexts.push_back(kCtxEffective);
  for (std::size_t i = n; i-- > 0;) {
    const std::uint8_t ctx = contexts.back();
    contexts.pop_back();
    std::uint8_t& f = out.flags[i];
    const bool effective = ctx & kCtxEffective;
    const bool intron =
        (ctx & kCtxInIntron) || ((ctx & kCtxParentEffective) && (f & kNodeSiblingFixes));
    if (effective) {
      f |= kNodeEffective;
      ++out.effective_count;
    }
    if (intron) {
      f |= kNodeIntron;
      ++out.intron_count;
    }
    if (f & kNodeConstant) ++out.constant_count;
    if (!is_leaf(nodes[i])) {
      std::uint8_t child = 0;
      if (effective && !(f & kNodeConstant)) child |= kCtxEffective;
      if (effective) child |= kCtxParentEffective;
      if (intron) child |= kCtxInIntron;
      contexts.push_back(child);
      contexts.push_back(child);
    }
  }
  return out;
}

void CodeCensus::add(const NodeClassification& c) {
  ++trees;
  nodes += c.size();
  constants += c.constant_count;
  introns += c.intron_count;
  effective += c.effective_count;
}

CodeCensus& CodeCensus::operator+=(const CodeCensus& other) {
  trees += other.trees;
  nodes += other.nodes;
  constants += other.constants;
  introns += other.introns;
  effective += other.effective;
  return *this;
}

double CodeCensus::constant_fraction() const {
  return nodes == 0 ? 0.0 : static_cast<double>(constants) / static_cast<double>(nodes);
}

double CodeCensus::effective_fraction() const {
  return nodes == 0 ? 0.0 : static_cast<double>(effective) / static_cast<double>(nodes);
}

double CodeCensus::mean_effective() const {
  return trees == 0 ? 0.0 : static_cast<double>(effective) / static_cast<double>(trees);
}

CodeCensus population_code_census(std::span<const Tree> trees) {
  CodeCensus census;
  for (const Tree& t : trees) census.add(classify_nodes(t));
  return census;
}

std::size_t count_solution_subtrees(const Tree& tree) {
  std::size_t count = 0;
  node_values(tree, [&](std::size_t, CaseVector v) { count += v == kMux6Target; });
  return count;
}

std::vector<std::string> effective_paths(const Tree& tree, const NodeClassification& classes) {
  std::vector<std::string> paths;
  const std::size_t n = tree.size();
  if (n == 0) return paths;
  const auto nodes = tree.nodes();
  // Reverse postfix visits the right child before the left one, so the left
  // child's pending entry is pushed first.
  struct Pending {
    std::string path;
    bool effective_parent;
  };
  std::vector<Pending> stack;
  stack.push_back({std::string(), true});
  for (std::size_t i = n; i-- > 0;) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    const bool effective = classes.effective(i);
    std::string path;
    if (effective) {
      path = std::move(p.path);
      if (path.empty()) {
        path.push_back(static_cast<char>(nodes[i]));
      } else {
        path.back() = static_cast<char>(static_cast<std::uint8_t>(path.back()) | static_cast<std::uint8_t>(nodes[i]));
      }
      paths.push_back(path);
    }
    if (!is_leaf(nodes[i])) {
      if (effective) {
        stack.push_back({path + static_cast<char>(0x00), true});
        stack.push_back({path + static_cast<char>(0x10), true});
      } else {
        stack.push_back({std::string(), false});
        stack.push_back({std::string(), false});
      }
    }
  }
  return paths;
}

std::string render_path(const std::string& key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    const auto byte = static_cast<std::uint8_t>(key[i]);
    const auto op = static_cast<Opcode>(byte & 0x0F);
    if (i == 0) {
      out += opcode_name(op);
    } else {
      out += (byte & 0x10) ? " R:" : " L:";
      out += opcode_name(op);
    }
  }
  return out;
}

EffectiveCodeReport effective_code_overlap(std::span<const Tree> trees, std::span<const int> fitness,
                                           double threshold) {
  if (trees.size() != fitness.size()) throw std::invalid_argument("effective_code_overlap: size mismatch");
  EffectiveCodeReport report;
  report.threshold = threshold;
  if (trees.empty()) return report;
  const int best = *std::max_element(fitness.begin(), fitness.end());
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const NodeClassification classes = classify_nodes(trees[t]);
    report.effective_per_tree.push_back(classes.effective_count);
    total += classes.effective_count;
    if (fitness[t] != best) continue;
    ++report.trees_considered;
    for (const std::string& path : effective_paths(trees[t], classes)) ++report.path_counts[path];
  }
  report.mean_effective = static_cast<double>(total) / static_cast<double>(trees.size());
  const auto needed = static_cast<std::uint64_t>(std::ceil(threshold * static_cast<double>(report.trees_considered)));
  for (const auto& [path, count] : report.path_counts) report.shared_core += count >= needed;
  return report;
}

std::vector<SizeChangeBin> size_change_histogram(std::span<const std::int64_t> changes) {
  // Key: exact value for |d| <= 8, else +-(decile index) offset past 8.
  std::map<std::int64_t, SizeChangeBin> bins;
  for (std::int64_t d : changes) {
    const std::int64_t mag = d < 0 ? -d : d;
    if (mag <= 8) {
      auto& b = bins[d * 1000];
      b.lo = b.hi = d;
      ++b.count;
      continue;
    }
    const int idx = decile_bin_index(static_cast<std::uint64_t>(mag));
    const auto lo = static_cast<std::int64_t>(std::max<std::uint64_t>(9, decile_bin_lower(idx)));
    const auto hi = static_cast<std::int64_t>(decile_bin_lower(idx + 1)) - 1;
    const std::int64_t key = d < 0 ? -(8000 + idx) * 1000 : (8000 + idx) * 1000;
    auto& b = bins[key];
    if (d < 0) {
      b.lo = -hi;
      b.hi = -lo;
    } else {
      b.lo = lo;
      b.hi = hi;
    }
    ++b.count;
  }
  std::vector<SizeChangeBin> out;
  out.reserve(bins.size());
  for (const auto& [key, b] : bins) out.push_back(b);
  std::sort(out.begin(), out.end(), [](const SizeChangeBin& a, const SizeChangeBin& b) { return a.lo < b.lo; });
  return out;
}

RuntParentReport runt_parent_report(std::span<const RuntEvent> events) {
  RuntParentReport report;
  std::vector<double> child, mum, dad;
  std::vector<std::int64_t> changes;
  std::uint64_t below = 0;
  for (const RuntEvent& e : events) {
    if (e.mum_fitness != kMaxFitness || e.dad_fitness != kMaxFitness) continue;
    if (e.child_fitness >= kMaxFitness) continue;
    ++report.events;
    child.push_back(static_cast<double>(e.child_size));
    mum.push_back(static_cast<double>(e.mum_size));
    dad.push_back(static_cast<double>(e.dad_size));
    report.mum_minus_mean.push_back(static_cast<double>(e.mum_size) - e.parent_mean_size);
    below += static_cast<double>(e.mum_size) < e.parent_mean_size;
    const std::int64_t d = static_cast<std::int64_t>(e.child_size) - static_cast<std::int64_t>(e.mum_size);
    changes.push_back(d);
    if (d < 0) {
      ++report.smaller_than_mum;
    } else if (d > 0) {
      ++report.larger_than_mum;
    } else {
      ++report.same_as_mum;
    }
  }
  report.mum_correlation = pearson(child, mum);
  report.dad_correlation = pearson(child, dad);
  if (report.events > 0) {
    report.mum_below_mean_fraction = static_cast<double>(below) / static_cast<double>(report.events);
  }
  report.size_change_histogram = size_change_histogram(changes);
  return report;
}

std::optional<std::uint64_t> first_convergence(std::span<const GenerationStats> log) {
  for (const GenerationStats& s : log) {
    if (s.runt_count == 0 && s.best_fitness == kMaxFitness) return s.generation;
  }
  return std::nullopt;
}

std::vector<UpDownRow> size_change_vs_runts(std::span<const GenerationStats> log, std::uint64_t first_conv) {
  std::map<std::uint64_t, UpDownRow> rows;
  for (std::size_t i = 0; i + 1 < log.size(); ++i) {
    if (log[i].generation < first_conv) continue;
    const double delta = log[i + 1].mean_size - log[i].mean_size;
    UpDownRow& row = rows[log[i].runt_count];
    row.runts = log[i].runt_count;
    if (delta > 0) ++row.rises;
    if (delta < 0) ++row.falls;
  }
  std::vector<UpDownRow> out;
  out.reserve(rows.size());
  for (auto& [runts, row] : rows) {
    if (row.rises > 5 && row.falls > 5) row.ratio = static_cast<double>(row.rises) / static_cast<double>(row.falls);
    out.push_back(row);
  }
  return out;
}

void WholeTreeInsertionTracker::record(std::uint64_t dad_size, bool dad_point_at_root) {
  if (dad_size == 0) throw std::invalid_argument("WholeTreeInsertionTracker: dad size must be >= 1");
  const double p = 1.0 / static_cast<double>(dad_size);
  ++events_;
  observed_ += dad_point_at_root;
  expected_ += p;
  variance_ += p * (1.0 - p);
}

WholeTreeInsertionTracker& WholeTreeInsertionTracker::operator+=(const WholeTreeInsertionTracker& other) {
  events_ += other.events_;
  observed_ += other.observed_;
  expected_ += other.expected_;
  variance_ += other.variance_;
  return *this;
}

double WholeTreeInsertionTracker::sigma() const noexcept { return std::sqrt(variance_); }

std::vector<SizeDepthPoint> size_depth_scatter(std::span<const Tree> trees, const ScatterOptions& options, Rng& rng) {
  std::vector<SizeDepthPoint> points;
  struct Pending {
    std::uint64_t size;
    int depth;
  };
  std::vector<Pending> stack;
  std::vector<std::size_t> picks;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Tree& tree : trees) {
    const std::size_t n = tree.size();
    const bool huge = options.include_subtrees && n > options.huge_tree_threshold;
    picks.clear();
    if (huge) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 2);
      for (std::size_t s = 0; s < options.huge_tree_samples; ++s) picks.push_back(pick(rng));
      std::sort(picks.begin(), picks.end());
    }
    std::size_t next_pick = 0;
    stack.clear();
    for (std::size_t i = 0; i < n; ++i) {
      Pending p{1, 0};
      if (!is_leaf(tree[i])) {
        const Pending right = stack.back();
        stack.pop_back();
        const Pending left = stack.back();
        stack.pop_back();
        p = {1 + left.size + right.size, 1 + std::max(left.depth, right.depth)};
      }
      stack.push_back(p);
      if (!options.include_subtrees || i + 1 == n) continue;
      if (huge) {
        while (next_pick < picks.size() && picks[next_pick] == i) {
          points.push_back({p.size, p.depth, false});
          ++next_pick;
        }
      } else if (options.sample_rate >= 1.0 || unit(rng) < options.sample_rate) {
        points.push_back({p.size, p.depth, false});
      }
    }
    if (n > 0) points.push_back({stack.back().size, stack.back().depth, true});
  }
  return points;
}

int decile_bin_index(std::uint64_t size) {
  if (size == 0) throw std::invalid_argument("decile_bin_index: size must be >= 1");
  int b = static_cast<int>(std::floor(10.0 * std::log10(static_cast<double>(size))));
  // Guard rounding at the edges so bins stay monotone in size.
  while (b > 0 && std::pow(10.0, b / 10.0) > static_cast<double>(size) * (1 + 1e-15)) --b;
  while (std::pow(10.0, (b + 1) / 10.0) <= static_cast<double>(size)) ++b;
  return b;
}

std::uint64_t decile_bin_lower(int index) {
  auto s = static_cast<std::uint64_t>(std::ceil(std::pow(10.0, index / 10.0)));
  if (s < 1) s = 1;
  while (s > 1 && decile_bin_index(s - 1) >= index) --s;
  while (decile_bin_index(s) < index) ++s;
  return s;
}

std::vector<DecileBin> decile_histogram_with_exceedance(std::span<const std::uint64_t> sizes, const SizeMass& mass) {
  if (sizes.empty()) throw std::invalid_argument("decile_histogram_with_exceedance: no sizes");
  std::map<int, std::uint64_t> counts;
  int top = 0;
  for (std::uint64_t s : sizes) {
    const int b = decile_bin_index(s);
    ++counts[b];
    top = std::max(top, b);
  }
  const auto total = static_cast<double>(sizes.size());
  std::vector<DecileBin> bins;
  for (int b = 0; b <= top; ++b) {
    DecileBin bin;
    bin.lo = decile_bin_lower(b);
    bin.hi = decile_bin_lower(b + 1);
    if (bin.hi <= bin.lo) continue;
    const auto it = counts.find(b);
    bin.observed = it == counts.end() ? 0 : it->second;
    const double p = std::clamp(mass(bin.lo, bin.hi), 0.0, 1.0);
    bin.expected = total * p;
    bin.sigma = std::sqrt(total * p * (1.0 - p));
    bin.exceedance = std::max(0.0, static_cast<double>(bin.observed) - bin.expected - 3.0 * bin.sigma);
    bins.push_back(bin);
  }
  return bins;
}

}  // namespace ltgp
