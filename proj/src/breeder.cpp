#include "ltgp/breeder.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>

#include "ltgp/error.hpp"
#include "ltgp/evaluator.hpp"
#include "ltgp/parallel.hpp"
#include "ltgp/reporting.hpp"

namespace ltgp {

namespace {

constexpr std::uint64_t kDefaultExtendedBudget = 4ULL << 30;
// Vector header plus allocator slack per tree, for the storage budget.
constexpr std::uint64_t kPerTreeOverhead = 64;

struct Planned {
  Lineage lineage;
  bool mum_fitness_used = false;
  bool dad_fitness_used = false;
};

}  // namespace

void RunConfig::apply_extended() {
  extended_mode = true;
  popsize = 50;
  size_limit.reset();
  generations = 100'000;
  if (!memory_budget_bytes) memory_budget_bytes = kDefaultExtendedBudget;
}

void RunConfig::validate() const {
  if (popsize < 2) throw UsageError("popsize must be >= 2");
  if (popsize > std::numeric_limits<std::uint32_t>::max()) throw UsageError("popsize too large");
  if (tournament_size < 1) throw UsageError("tournament_size must be >= 1");
  if (generations < 1) throw UsageError("generations must be >= 1");
  if (init_depth_lo < 1 || init_depth_lo > init_depth_hi) throw UsageError("need 1 <= init_depth_lo <= init_depth_hi");
  if (init_depth_hi > 20) throw UsageError("init_depth_hi must be <= 20");
  if (stats_cadence < 1) throw UsageError("stats_cadence must be >= 1");
  if (size_limit && *size_limit < 1) throw UsageError("size_limit must be >= 1");
  if (workers < 1) throw UsageError("workers must be >= 1");
}

Population make_population(std::vector<Tree> trees, unsigned workers) {
  Population pop;
  pop.fitness.assign(trees.size(), 0);
  pop.trees = std::move(trees);
  parallel_for(pop.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) pop.fitness[i] = fitness(evaluate(pop.trees[i]));
  });
  return pop;
}

Rng generation_rng(std::uint64_t seed, std::uint64_t generation) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(generation >> 32)};
  return Rng(seq);
}

TournamentOutcome tournament_select(std::span<const int> fitness, int tournament_size, Rng& rng,
                                    bool selection_enabled) {
  std::uniform_int_distribution<std::size_t> pick(0, fitness.size() - 1);
  TournamentOutcome out;
  out.winner = pick(rng);
  if (!selection_enabled) return out;
  int best = fitness[out.winner];
  for (int e = 1; e < tournament_size; ++e) {
    const std::size_t entrant = pick(rng);
    const int f = fitness[entrant];
    if (f != best) out.fitness_used = true;
    if (f > best) {
      best = f;
      out.winner = entrant;
    }
  }
  return out;
}

BreedResult breed_generation(const Population& parents, const RunConfig& config, Rng& rng,
                             const std::vector<NodeClassification>* parent_classes) {
  const std::size_t n = config.popsize;
  BreedResult result;
  std::vector<Planned> plan(n);
  for (Planned& p : plan) {
    const TournamentOutcome mum = tournament_select(parents.fitness, config.tournament_size, rng,
                                                    config.selection_enabled);
    const TournamentOutcome dad = tournament_select(parents.fitness, config.tournament_size, rng,
                                                    config.selection_enabled);
    const CrossoverPoints points = pick_crossover_points(parents.trees[mum.winner], parents.trees[dad.winner], rng);
    p.lineage = {mum.winner, dad.winner, points.mum, points.dad};
    p.mum_fitness_used = mum.fitness_used;
    p.dad_fitness_used = dad.fitness_used;
  }

  // Sizes first so an over-budget generation is refused before allocating.
  std::vector<std::uint64_t> sizes(n);
  parallel_for(n, config.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const Lineage& l = plan[c].lineage;
      sizes[c] = splice_size(parents.trees[l.mum], l.mum_point, parents.trees[l.dad], l.dad_point);
    }
  });
  for (std::uint64_t s : sizes) result.required_bytes += s + kPerTreeOverhead;
  if (config.memory_budget_bytes && result.required_bytes > *config.memory_budget_bytes) {
    result.budget_exceeded = true;
    return result;
  }

  result.children.trees.resize(n);
  result.children.fitness.assign(n, 0);
  parallel_for(n, config.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      const Lineage& l = plan[c].lineage;
      result.children.trees[c] = splice(parents.trees[l.mum], l.mum_point, parents.trees[l.dad], l.dad_point);
      result.children.fitness[c] = fitness(evaluate(result.children.trees[c]));
    }
  });

  double parent_total = 0.0;
  for (const Tree& t : parents.trees) parent_total += static_cast<double>(t.size());
  const double parent_mean = parent_total / static_cast<double>(parents.size());

  std::uint64_t ineffective = 0, runts_ineffective = 0, runts_intron = 0;
  result.lineage.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Planned& p = plan[c];
    const Lineage& l = p.lineage;
    result.lineage.push_back(l);
    result.fitness_tournaments += p.mum_fitness_used + p.dad_fitness_used;
    const Tree& mum = parents.trees[l.mum];
    const Tree& dad = parents.trees[l.dad];
    const int child_fit = result.children.fitness[c];
    const int mum_fit = parents.fitness[l.mum];
    const int dad_fit = parents.fitness[l.dad];
    result.wti.record(dad.size(), l.dad_point + 1 == dad.size());
    if (config.size_limit && sizes[c] >= *config.size_limit) result.size_limit_hit = true;
    if (child_fit < mum_fit && child_fit < dad_fit) {
      result.runts.push_back({0, sizes[c], child_fit, mum.size(), mum_fit, dad.size(), dad_fit, parent_mean});
    }
    if (parent_classes) {
      const NodeClassification& mc = (*parent_classes)[l.mum];
      if (!mc.effective(l.mum_point)) {
        ++ineffective;
        if (child_fit < mum_fit) ++runts_ineffective;
      }
      if (mc.intron(l.mum_point) && child_fit < mum_fit) ++runts_intron;
    }
  }
  if (parent_classes) {
    result.ineffective_crossover_fraction = static_cast<double>(ineffective) / static_cast<double>(n);
    result.runts_from_ineffective = runts_ineffective;
    result.runts_from_intron = runts_intron;
  }
  return result;
}

GenerationStats measure_population(const Population& pop, std::uint64_t generation, unsigned workers,
                                   std::vector<NodeClassification>* classes_out) {
  GenerationStats s;
  s.generation = generation;
  const std::size_t n = pop.size();
  if (n == 0) return s;
  std::vector<int> depths(n);
  std::vector<std::uint64_t> solutions(classes_out ? n : 0);
  if (classes_out) classes_out->assign(n, NodeClassification{});
  parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      depths[i] = tree_depth(pop.trees[i]);
      if (classes_out) {
        (*classes_out)[i] = classify_nodes(pop.trees[i]);
        solutions[i] = count_solution_subtrees(pop.trees[i]);
      }
    }
  });
  double total_size = 0.0, total_depth = 0.0;
  s.min_size = std::numeric_limits<std::uint64_t>::max();
  s.best_fitness = std::numeric_limits<int>::min();
  s.worst_fitness = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t size = pop.trees[i].size();
    total_size += static_cast<double>(size);
    total_depth += depths[i];
    s.min_size = std::min(s.min_size, size);
    s.max_size = std::max(s.max_size, size);
    s.best_fitness = std::max(s.best_fitness, pop.fitness[i]);
    s.worst_fitness = std::min(s.worst_fitness, pop.fitness[i]);
    s.runt_count += pop.fitness[i] < kMaxFitness;
  }
  s.mean_size = total_size / static_cast<double>(n);
  s.mean_depth = total_depth / static_cast<double>(n);
  if (classes_out) {
    CodeCensus census;
    std::uint64_t total_solutions = 0;
    for (std::size_t i = 0; i < n; ++i) {
      census.add((*classes_out)[i]);
      total_solutions += solutions[i];
    }
    s.mean_effective = census.mean_effective();
    s.constant_fraction = census.constant_fraction();
    s.solution_subtrees_mean = static_cast<double>(total_solutions) / static_cast<double>(n);
  }
  return s;
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::size_limit: return "size-limit";
    case Termination::budget: return "budget";
    case Termination::converged_stuck: return "converged-stuck";
  }
  return "?";
}

namespace {

RunLog run_from(const RunConfig& config, Population pop, std::uint64_t first_generation, std::uint64_t last_generation,
                const RunHooks& hooks) {
  RunLog log;
  log.config = config;
  const bool writing = !config.out_dir.empty();
  const std::filesystem::path dir(config.out_dir);
  std::optional<GenerationCsvWriter> csv;
  if (writing) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    csv.emplace(dir / "run.csv");
  }
  auto checkpoint = [&](const Population& p, std::uint64_t gen, const std::string& name) {
    try {
      write_snapshot(dir / name, p.trees, SnapshotMeta{kSnapshotVersion, gen, config.seed});
    } catch (const IoError& e) {
      throw IoError(std::string(e.what()) + " at generation " + std::to_string(gen));
    }
  };

  std::vector<NodeClassification> classes;
  bool classified = false;
  std::uint64_t gen = first_generation;
  GenerationStats breed_extras;  // crossover measurements for `gen`
  while (true) {
    const bool census = gen % config.stats_cadence == 0;
    GenerationStats s = measure_population(pop, gen, config.workers, census ? &classes : nullptr);
    s.wti_observed = breed_extras.wti_observed;
    s.wti_expected = breed_extras.wti_expected;
    s.ineffective_crossover_fraction = breed_extras.ineffective_crossover_fraction;
    s.runts_from_ineffective = breed_extras.runts_from_ineffective;
    s.runts_from_intron = breed_extras.runts_from_intron;
    classified = census;
    if (!log.first_success && s.best_fitness == kMaxFitness) log.first_success = gen;
    if (!log.first_convergence && s.best_fitness == kMaxFitness && s.runt_count == 0) log.first_convergence = gen;
    log.generations.push_back(s);
    if (csv) csv->write(s);
    if (hooks.on_generation) hooks.on_generation(pop, s);
    if (writing && config.checkpoint_every > 0 && gen % config.checkpoint_every == 0 && gen != first_generation) {
      checkpoint(pop, gen, "snapshot_" + std::to_string(gen) + ".bin");
    }
    log.termination_generation = gen;

    if (log.termination_detail.empty() && s.max_size == 1) {
      log.termination = Termination::converged_stuck;
      log.termination_detail = "every tree is a single leaf";
      break;
    }
    if (!log.termination_detail.empty()) break;  // size limit flagged while breeding `gen`
    if (gen >= last_generation) {
      log.termination = Termination::completed;
      break;
    }

    Rng rng = generation_rng(config.seed, gen + 1);
    BreedResult bred = breed_generation(pop, config, rng, classified ? &classes : nullptr);
    if (bred.budget_exceeded) {
      log.termination = Termination::budget;
      log.termination_detail = "generation " + std::to_string(gen + 1) + " needs " +
                               std::to_string(bred.required_bytes) + " bytes, budget " +
                               std::to_string(*config.memory_budget_bytes);
      break;
    }
    ++gen;
    for (RuntEvent& e : bred.runts) {
      e.generation = gen;
      log.runt_events.push_back(e);
    }
    if (log.first_convergence) {
      log.wti_since_convergence += bred.wti;
    }
    breed_extras = GenerationStats{};
    breed_extras.wti_observed = bred.wti.observed();
    breed_extras.wti_expected = bred.wti.expected();
    breed_extras.ineffective_crossover_fraction = bred.ineffective_crossover_fraction;
    breed_extras.runts_from_ineffective = bred.runts_from_ineffective;
    breed_extras.runts_from_intron = bred.runts_from_intron;
    pop = std::move(bred.children);
    if (bred.size_limit_hit) {
      log.termination = Termination::size_limit;
      log.termination_detail = "a child reached the size limit of " + std::to_string(*config.size_limit) +
                               " nodes in generation " + std::to_string(gen);
    }
  }

  if (writing) {
    csv->flush();
    write_runt_events_csv(log.runt_events, dir / "runts.csv");
    checkpoint(pop, log.termination_generation, "final.bin");
  }
  log.final_population = std::move(pop);
  return log;
}

}  // namespace

RunLog run_experiment(const RunConfig& config, const RunHooks& hooks) {
  config.validate();
  Rng init = generation_rng(config.seed, 0);
  std::vector<Tree> trees = ramped_half_and_half(config.popsize, config.init_depth_lo, config.init_depth_hi, init);
  return run_from(config, make_population(std::move(trees), config.workers), 0, config.generations - 1, hooks);
}

RunLog resume_experiment(const RunConfig& config, std::vector<Tree> start, std::uint64_t start_generation,
                         std::uint64_t generations, const RunHooks& hooks) {
  RunConfig cfg = config;
  cfg.popsize = start.size();
  cfg.validate();
  return run_from(cfg, make_population(std::move(start), cfg.workers), start_generation,
                  start_generation + generations, hooks);
}

}  // namespace ltgp
