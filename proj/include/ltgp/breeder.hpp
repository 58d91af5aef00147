#pragma once

// Generational, panmictic, non-elitist breeding: every child comes from one
// subtree crossover between two tournament winners (first winner = mum, the
// root donor). All randomness for a generation comes from one stream derived
// from (seed, generation) and is consumed sequentially in child order, so
// results do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltgp/analysis.hpp"
#include "ltgp/genome.hpp"
#include "ltgp/stats.hpp"

namespace ltgp {

struct RunConfig {
  std::uint64_t popsize = 500;
  int tournament_size = 7;
  std::uint64_t generations = 10'000;
  /// A child reaching this many nodes ends the run after its generation.
  std::optional<std::uint64_t> size_limit = 1'000'000;
  int init_depth_lo = 2;
  int init_depth_hi = 6;
  std::uint64_t seed = 1;
  bool selection_enabled = true;
  /// Generations between census passes (effective code, constants, solution
  /// subtrees).
  std::uint64_t stats_cadence = 100;
  bool extended_mode = false;
  /// Bytes of tree storage a child population may need before the run stops.
  std::optional<std::uint64_t> memory_budget_bytes;
  unsigned workers = 1;
  /// Snapshot every this many generations when writing output; 0 disables.
  std::uint64_t checkpoint_every = 1'000;
  /// Output directory for run.csv, runts.csv and snapshots; empty = none.
  std::string out_dir;

  /// Applies the long unbounded-run settings: 50 individuals, no size limit,
  /// 100 000 generations and a 4 GiB storage budget.
  void apply_extended();
  /// Throws UsageError naming the offending field.
  void validate() const;
};

struct Population {
  std::vector<Tree> trees;
  std::vector<int> fitness;
  std::size_t size() const noexcept { return trees.size(); }
};

/// Evaluates and caches fitness for every tree.
Population make_population(std::vector<Tree> trees, unsigned workers = 1);

/// Generation-specific random stream.
Rng generation_rng(std::uint64_t seed, std::uint64_t generation);

struct TournamentOutcome {
  std::size_t winner = 0;
  /// Entrants did not all share one fitness value.
  bool fitness_used = false;
};

/// k entrants drawn uniformly with replacement; the first entrant of maximal
/// fitness wins, which is a uniform choice among maximal entrants since the
/// draws are exchangeable. With selection disabled one uniform draw decides.
TournamentOutcome tournament_select(std::span<const int> fitness, int tournament_size, Rng& rng,
                                    bool selection_enabled = true);

struct Lineage {
  std::size_t mum = 0;
  std::size_t dad = 0;
  std::size_t mum_point = 0;
  std::size_t dad_point = 0;
};

struct BreedResult {
  Population children;
  std::vector<Lineage> lineage;
  std::vector<RuntEvent> runts;
  /// Tournaments (of 2 * popsize) whose entrants differed in fitness.
  std::uint64_t fitness_tournaments = 0;
  WholeTreeInsertionTracker wti;
  std::optional<double> ineffective_crossover_fraction;
  std::optional<std::uint64_t> runts_from_ineffective;
  std::optional<std::uint64_t> runts_from_intron;
  bool size_limit_hit = false;
  /// Children were not built: their storage would exceed the budget.
  bool budget_exceeded = false;
  std::uint64_t required_bytes = 0;
};

/// One generation. `parent_classes`, when given, parallels parents.trees and
/// enables the ineffective-crossover measurements.
BreedResult breed_generation(const Population& parents, const RunConfig& config, Rng& rng,
                             const std::vector<NodeClassification>* parent_classes = nullptr);

/// Size, depth and fitness summary; census fields as well when
/// `classes_out` is non-null (filled with one classification per tree).
GenerationStats measure_population(const Population& pop, std::uint64_t generation, unsigned workers,
                                   std::vector<NodeClassification>* classes_out = nullptr);

enum class Termination { completed, size_limit, budget, converged_stuck };
std::string_view termination_name(Termination t);

struct RunLog {
  RunConfig config;
  std::vector<GenerationStats> generations;
  Termination termination = Termination::completed;
  /// Last generation logged (the offending one for size-limit aborts).
  std::uint64_t termination_generation = 0;
  std::string termination_detail;
  std::optional<std::uint64_t> first_success;
  std::optional<std::uint64_t> first_convergence;
  std::vector<RuntEvent> runt_events;
  /// Whole-tree insertions counted from first convergence on.
  WholeTreeInsertionTracker wti_since_convergence;
  Population final_population;
};

struct RunHooks {
  std::function<void(const Population&, const GenerationStats&)> on_generation;
};

RunLog run_experiment(const RunConfig& config, const RunHooks& hooks = {});

/// Continues breeding from `start` (generation `start_generation`) for
/// `generations` more generations using the same per-generation streams as
/// the original run, so a checkpoint replays the run exactly.
RunLog resume_experiment(const RunConfig& config, std::vector<Tree> start, std::uint64_t start_generation,
                         std::uint64_t generations, const RunHooks& hooks = {});

}  // namespace ltgp
