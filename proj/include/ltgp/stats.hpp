#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace ltgp {

/// Measurements of one generation's population. Optional fields are only
/// filled on census generations (every `stats_cadence` generations) or when
/// the quantity is defined.
struct GenerationStats {
  std::uint64_t generation = 0;
  double mean_size = 0.0;
  std::uint64_t min_size = 0;
  std::uint64_t max_size = 0;
  double mean_depth = 0.0;
  int best_fitness = 0;
  int worst_fitness = 0;
  /// Individuals with fitness < 64.
  std::uint64_t runt_count = 0;

  std::optional<double> mean_effective;
  std::optional<double> constant_fraction;
  std::optional<double> solution_subtrees_mean;

  /// Crossovers that produced this generation whose dad point was dad's root,
  /// and the expectation sum of 1/size(dad) over those crossovers.
  std::uint64_t wti_observed = 0;
  double wti_expected = 0.0;

  /// Filled when the parent generation was classified: fraction of the
  /// crossovers producing this generation whose mum point was ineffective
  /// code, and how many of those children lost fitness relative to mum.
  std::optional<double> ineffective_crossover_fraction;
  std::optional<std::uint64_t> runts_from_ineffective;
  std::optional<std::uint64_t> runts_from_intron;

  bool fitness_converged() const noexcept { return best_fitness == worst_fitness; }
};

/// A child whose fitness is below both of its parents'.
struct RuntEvent {
  std::uint64_t generation = 0;
  std::uint64_t child_size = 0;
  int child_fitness = 0;
  std::uint64_t mum_size = 0;
  int mum_fitness = 0;
  std::uint64_t dad_size = 0;
  int dad_fitness = 0;
  /// Mean tree size of the parent population.
  double parent_mean_size = 0.0;
};

}  // namespace ltgp
