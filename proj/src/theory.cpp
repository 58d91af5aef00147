#include "ltgp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ltgp {

namespace {

void check_p(double p) {
  if (!(p >= 0.0 && p < 0.5)) {
    throw std::invalid_argument("limiting size distribution needs 0 <= p_a < 1/2, got " + std::to_string(p));
  }
}

}  // namespace

double expected_fitness_tournaments(double runts, double popsize, int tournament_size) {
  if (popsize <= 0 || tournament_size < 1) throw std::invalid_argument("expected_fitness_tournaments: bad P or k");
  if (runts < 0 || runts > popsize) throw std::invalid_argument("expected_fitness_tournaments: need 0 <= x <= P");
  return 2.0 * popsize * (1.0 - std::pow(1.0 - runts / popsize, tournament_size));
}

double log_branching_size_pmf(std::uint64_t n_internal, double p) {
  check_p(p);
  const auto n = static_cast<double>(n_internal);
  // log Catalan(n) = lgamma(2n+1) - lgamma(n+1) - lgamma(n+2)
  const double log_catalan = std::lgamma(2 * n + 1) - std::lgamma(n + 1) - std::lgamma(n + 2);
  const double log_p = n_internal == 0 ? 0.0 : n * std::log(p);
  return log_catalan + log_p + (n + 1) * std::log1p(-p);
}

double branching_size_pmf(std::uint64_t n_internal, double p) {
  check_p(p);
  if (p == 0.0) return n_internal == 0 ? 1.0 : 0.0;
  return std::exp(log_branching_size_pmf(n_internal, p));
}

double log_limiting_size_pmf(std::uint64_t n_internal, double p) {
  const auto n = static_cast<double>(n_internal);
  return std::log1p(-2.0 * p) + std::log(2 * n + 1) + log_branching_size_pmf(n_internal, p);
}

double limiting_size_pmf(std::uint64_t n_internal, double p) {
  check_p(p);
  if (p == 0.0) return n_internal == 0 ? 1.0 : 0.0;
  return std::exp(log_limiting_size_pmf(n_internal, p));
}

double limiting_size_pmf_by_nodes(std::uint64_t nodes, double p) {
  if (nodes % 2 == 0) return 0.0;
  return limiting_size_pmf((nodes - 1) / 2, p);
}

double limiting_mean_nodes(double p) {
  check_p(p);
  const double u = 1.0 - 2.0 * p;
  return 1.0 / (u * u) + 1.0 / u - 1.0;
}

LimitingSizeDistribution::LimitingSizeDistribution(double p_internal) : p_(p_internal) { check_p(p_internal); }

LimitingSizeDistribution LimitingSizeDistribution::fit_to_mean(double mean_nodes) {
  return LimitingSizeDistribution(limiting_pa_from_mean(mean_nodes));
}

double LimitingSizeDistribution::mean_nodes() const noexcept {
  const double u = 1.0 - 2.0 * p_;
  return 1.0 / (u * u) + 1.0 / u - 1.0;
}

double LimitingSizeDistribution::mass(std::uint64_t lo, std::uint64_t hi) const {
  // Odd sizes 2n+1 in [lo, hi).
  if (hi <= lo) return 0.0;
  const std::uint64_t n_lo = lo <= 1 ? 0 : lo / 2;  // smallest n with 2n+1 >= lo
  if (hi <= 2 * n_lo + 1) return 0.0;
  const std::uint64_t n_hi = (hi - 2) / 2;  // largest n with 2n+1 < hi
  if (p_ == 0.0) return n_lo == 0 ? 1.0 : 0.0;
  // Ratio recurrence pmf(n+1)/pmf(n) = 2(2n+3)/(n+2) p(1-p), anchored exactly
  // every few thousand terms.
  const double step = p_ * (1.0 - p_);
  long double sum = 0.0L;
  double term = 0.0;
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    if ((n - n_lo) % 4096 == 0) {
      term = limiting_size_pmf(n, p_);
    } else {
      const auto m = static_cast<double>(n - 1);
      term *= 2.0 * (2.0 * m + 3.0) / (m + 2.0) * step;
    }
    sum += term;
    // The pmf is decreasing in n, so an underflowed term ends the sum.
    if (term == 0.0) break;
  }
  return static_cast<double>(sum);
}

double limiting_pa_from_mean(double mean_nodes) {
  if (!(mean_nodes >= 1.0)) throw std::invalid_argument("limiting_pa_from_mean: mean must be >= 1");
  // mean = 1/u^2 + 1/u - 1 with u = 1 - 2p
  const double inv_u = (-1.0 + std::sqrt(4.0 * mean_nodes + 5.0)) / 2.0;
  return std::max(0.0, (1.0 - 1.0 / inv_u) / 2.0);
}

double fit_pa_from_mean(double mean_nodes) {
  if (!(mean_nodes >= 1.0)) throw std::invalid_argument("fit_pa_from_mean: mean must be >= 1");
  return (mean_nodes - 1.0) / (2.0 * mean_nodes);
}

double flajolet_expected_depth(std::uint64_t n_internal) {
  if (n_internal < 1) throw std::invalid_argument("flajolet_expected_depth: n must be >= 1");
  return 2.0 * std::sqrt(std::numbers::pi * static_cast<double>(n_internal));
}

RemyBuilder::RemyBuilder(std::uint64_t reserve_internal) {
  const std::uint64_t nodes = 2 * reserve_internal + 1;
  if (nodes >= kNone) throw std::length_error("RemyBuilder: tree too large");
  left_.reserve(nodes);
  right_.reserve(nodes);
  parent_.reserve(nodes);
  left_.push_back(kNone);
  right_.push_back(kNone);
  parent_.push_back(kNone);
}

void RemyBuilder::grow(std::uint64_t node, bool new_leaf_left) {
  if (node >= left_.size()) throw std::out_of_range("RemyBuilder::grow: node out of range");
  if (left_.size() + 2 >= kNone) throw std::length_error("RemyBuilder: tree too large");
  const auto x = static_cast<std::uint32_t>(node);
  const auto internal = static_cast<std::uint32_t>(left_.size());
  const auto fresh = internal + 1;
  const std::uint32_t up = parent_[x];
  left_.push_back(new_leaf_left ? fresh : x);
  right_.push_back(new_leaf_left ? x : fresh);
  parent_.push_back(up);
  left_.push_back(kNone);
  right_.push_back(kNone);
  parent_.push_back(internal);
  parent_[x] = internal;
  if (up == kNone) {
    root_ = internal;
  } else if (left_[up] == x) {
    left_[up] = internal;
  } else {
    right_[up] = internal;
  }
}

Tree RemyBuilder::shape() const {
  return to_tree([] { return Opcode::d0; }, [] { return Opcode::op_and; });
}

Tree uniform_random_binary_tree(std::uint64_t n_internal, Rng& rng) {
  RemyBuilder builder(n_internal);
  std::uniform_int_distribution<int> coin(0, 1);
  for (std::uint64_t k = 0; k < n_internal; ++k) {
    std::uniform_int_distribution<std::uint64_t> pick(0, builder.node_count() - 1);
    const std::uint64_t node = pick(rng);
    builder.grow(node, coin(rng) == 1);
  }
  std::uniform_int_distribution<int> leaf_pick(0, kNumLeaves - 1);
  std::uniform_int_distribution<int> function_pick(kNumLeaves, kNumOpcodes - 1);
  return builder.to_tree([&] { return static_cast<Opcode>(leaf_pick(rng)); },
                         [&] { return static_cast<Opcode>(function_pick(rng)); });
}

std::uint64_t bloat_limit_estimate(std::uint64_t popsize, std::uint64_t core_size) {
  if (popsize == 0 || core_size == 0) throw std::invalid_argument("bloat_limit_estimate: arguments must be positive");
  return popsize * core_size;
}

}  // namespace ltgp
