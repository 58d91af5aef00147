// ltgp: run long-term 6-mux evolution experiments, analyze snapshots and
// run logs, and print reference curves.
//
// Exit status: 0 ok, 2 usage, 3 I/O, 4 data format, 5 resource budget.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltgp/analysis.hpp"
#include "ltgp/breeder.hpp"
#include "ltgp/config.hpp"
#include "ltgp/error.hpp"
#include "ltgp/evaluator.hpp"
#include "ltgp/kernels.hpp"
#include "ltgp/reporting.hpp"
#include "ltgp/theory.hpp"

namespace fs = std::filesystem;
using namespace ltgp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBudget = static_cast<int>(ErrorKind::budget);

struct Range {
  double lo = 0;
  double hi = 0;
};

// "a..b" or a single value "a".
Range parse_range(const std::string& text, const char* flag) {
  auto number = [&](std::string_view s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw UsageError(std::string(flag) + ": expected a number or a..b range, got '" + text + "'");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const double v = number(text);
    return {v, v};
  }
  const Range r{number(std::string_view(text).substr(0, dots)), number(std::string_view(text).substr(dots + 2))};
  if (r.hi < r.lo) throw UsageError(std::string(flag) + ": range end below start");
  return r;
}

std::vector<std::uint64_t> integer_steps(const Range& r, const char* flag) {
  if (r.lo < 0) throw UsageError(std::string(flag) + ": values must be non-negative");
  std::vector<std::uint64_t> out;
  for (auto v = static_cast<std::uint64_t>(r.lo); v <= static_cast<std::uint64_t>(r.hi); ++v) out.push_back(v);
  return out;
}

void print_summary(const RunLog& log, std::ostream& out) {
  out << "termination: " << termination_name(log.termination) << " at generation " << log.termination_generation
      << '\n';
  if (!log.termination_detail.empty()) out << "detail: " << log.termination_detail << '\n';
  out << "generations logged: " << log.generations.size() << '\n';
  out << "first success: " << (log.first_success ? std::to_string(*log.first_success) : "none") << '\n';
  out << "first convergence: " << (log.first_convergence ? std::to_string(*log.first_convergence) : "none")
      << '\n';
  if (!log.generations.empty()) {
    const GenerationStats& s = log.generations.back();
    out << "final mean size: " << format_real(s.mean_size) << "  max size: " << s.max_size
        << "  best fitness: " << s.best_fitness << "  runts: " << s.runt_count << '\n';
  }
  if (log.first_convergence) {
    const auto& w = log.wti_since_convergence;
    out << "whole-tree insertions since convergence: " << w.observed() << " (expected " << format_real(w.expected())
        << ", sigma " << format_real(w.sigma()) << ")\n";
  }
}

int finish_run(const RunLog& log) {
  print_summary(log, std::cout);
  return log.termination == Termination::budget ? kExitBudget : kExitOk;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  bool extended = false;
  bool no_selection = false;
};

void add_run_flags(CLI::App& cmd, RunArgs& args) {
  auto override_flag = [&](const char* flag, const char* key, const char* help) {
    cmd.add_option_function<std::string>(
        flag, [&args, key](const std::string& v) { args.overrides.emplace_back(key, v); }, help);
  };
  cmd.add_option("--config", args.config_path, "key=value file; flags given here override it")->check(CLI::ExistingFile);
  override_flag("--pop", "popsize", "population size");
  override_flag("--gens", "generations", "generations to log (generation 0 is the initial population)");
  override_flag("--tournament", "tournament_size", "tournament size");
  override_flag("--seed", "seed", "random seed");
  override_flag("--size-limit", "size_limit", "node count that ends the run, or none");
  override_flag("--out", "out_dir", "output directory for run.csv, runts.csv and snapshots");
  override_flag("--workers", "workers", "evaluation threads (results do not depend on it)");
  override_flag("--cadence", "stats_cadence", "generations between census passes");
  override_flag("--checkpoint-every", "checkpoint_every", "generations between snapshots, 0 for none");
  override_flag("--budget", "memory_budget_bytes", "tree storage budget in bytes, or none");
  cmd.add_flag("--no-selection", args.no_selection, "uniform parent choice");
  cmd.add_flag("--extended", args.extended, "population 50, no size limit, 100000 generations");
}

RunConfig build_config(const RunArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
  if (args.extended) cfg.apply_extended();
  for (const auto& [key, value] : args.overrides) apply_config_entry(cfg, key, value);
  if (args.no_selection) cfg.selection_enabled = false;
  if (cfg.out_dir.empty()) cfg.out_dir = "ltgp_run";
  cfg.validate();
  return cfg;
}

int cmd_run(const RunArgs& args) {
  const RunConfig cfg = build_config(args);
  std::cout << "writing " << cfg.out_dir << " (" << kernels::isa_name(kernels::active_isa()) << " scans)\n";
  return finish_run(run_experiment(cfg));
}

// --- replay -----------------------------------------------------------------

struct ReplayArgs {
  std::string snapshot;
  std::optional<std::uint64_t> seed;
  std::uint64_t gens = 100;
  std::string out;
  unsigned workers = 1;
  std::uint64_t cadence = 100;
  std::string size_limit = "none";
  bool no_selection = false;
};

int cmd_replay(const ReplayArgs& args) {
  Snapshot snap = read_snapshot(args.snapshot);
  RunConfig cfg;
  cfg.popsize = snap.trees.size();
  cfg.seed = args.seed.value_or(snap.meta.seed);
  cfg.out_dir = args.out;
  cfg.workers = args.workers;
  cfg.stats_cadence = args.cadence;
  cfg.selection_enabled = !args.no_selection;
  apply_config_entry(cfg, "size_limit", args.size_limit);
  cfg.generations = std::max<std::uint64_t>(args.gens, 1);
  cfg.validate();
  std::cout << "replaying " << snap.trees.size() << " trees from generation " << snap.meta.generation
            << " with seed " << cfg.seed << '\n';
  return finish_run(resume_experiment(cfg, std::move(snap.trees), snap.meta.generation, args.gens));
}

// --- analyze ----------------------------------------------------------------

struct AnalyzeArgs {
  std::string snapshot;
  std::string out = ".";
  bool census = false;
  bool effective = false;
  bool solutions = false;
  bool scatter = false;
  bool subtrees = false;
  double sample_rate = 1.0;
  bool histogram = false;
  bool mean_fit = false;
  std::optional<double> pa;
  bool overlap = false;
  double overlap_threshold = 0.99;
  std::optional<std::size_t> dot_tree;
  bool dot = false;
  std::string updown_csv;
  std::string runts_csv;
};

std::ofstream open_artifact(const fs::path& dir, const std::string& name, std::vector<fs::path>& written) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  written.push_back(path);
  return out;
}

void close_artifact(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

int cmd_analyze(const AnalyzeArgs& a) {
  const bool needs_snapshot = a.census || a.effective || a.solutions || a.scatter || a.histogram || a.overlap || a.dot;
  if (needs_snapshot && a.snapshot.empty()) throw UsageError("analyze: a snapshot is required for the requested tables");
  if (!needs_snapshot && a.updown_csv.empty() && a.runts_csv.empty()) {
    throw UsageError("analyze: nothing requested (see --help)");
  }
  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw IoError("cannot create " + a.out + ": " + ec.message());
  const fs::path dir(a.out);
  std::vector<fs::path> written;

  Snapshot snap;
  std::vector<int> fit;
  std::vector<NodeClassification> classes;
  if (needs_snapshot) {
    snap = read_snapshot(a.snapshot);
    for (const Tree& t : snap.trees) fit.push_back(fitness(evaluate(t)));
    if (a.census || a.effective || a.dot) {
      for (const Tree& t : snap.trees) classes.push_back(classify_nodes(t));
    }
  }

  if (a.census) {
    CodeCensus census;
    for (const auto& c : classes) census.add(c);
    auto out = open_artifact(dir, "census.csv", written);
    write_census_csv(census, out);
    close_artifact(out, written.back());
  }
  if (a.effective) {
    auto out = open_artifact(dir, "effective.csv", written);
    out << "tree,size,fitness,effective,constants,introns\n";
    for (std::size_t i = 0; i < snap.trees.size(); ++i) {
      out << i << ',' << snap.trees[i].size() << ',' << fit[i] << ',' << classes[i].effective_count << ','
          << classes[i].constant_count << ',' << classes[i].intron_count << '\n';
    }
    close_artifact(out, written.back());
  }
  if (a.solutions) {
    auto out = open_artifact(dir, "solutions.csv", written);
    out << "tree,size,fitness,solution_subtrees\n";
    for (std::size_t i = 0; i < snap.trees.size(); ++i) {
      out << i << ',' << snap.trees[i].size() << ',' << fit[i] << ',' << count_solution_subtrees(snap.trees[i])
          << '\n';
    }
    close_artifact(out, written.back());
  }
  if (a.scatter) {
    ScatterOptions opts;
    opts.include_subtrees = a.subtrees;
    opts.sample_rate = a.sample_rate;
    Rng rng(snap.meta.seed ^ 0x5ca77e5ULL);
    auto out = open_artifact(dir, "scatter.csv", written);
    write_scatter_csv(size_depth_scatter(snap.trees, opts, rng), out);
    close_artifact(out, written.back());
  }
  if (a.histogram) {
    std::vector<std::uint64_t> sizes;
    double total = 0;
    for (const Tree& t : snap.trees) {
      sizes.push_back(t.size());
      total += static_cast<double>(t.size());
    }
    const LimitingSizeDistribution dist = a.pa ? LimitingSizeDistribution(*a.pa)
                                               : LimitingSizeDistribution::fit_to_mean(total / static_cast<double>(sizes.size()));
    const SizeMass mass = [&](std::uint64_t lo, std::uint64_t hi) { return dist.mass(lo, hi); };
    auto out = open_artifact(dir, "histogram.csv", written);
    out << "# p_a=" << format_real(dist.p_internal()) << '\n';
    write_histogram_csv(decile_histogram_with_exceedance(sizes, mass), out);
    close_artifact(out, written.back());
  }
  if (a.overlap) {
    auto out = open_artifact(dir, "overlap.csv", written);
    write_overlap_csv(effective_code_overlap(snap.trees, fit, a.overlap_threshold), out);
    close_artifact(out, written.back());
  }
  if (a.dot) {
    std::size_t index = 0;
    if (a.dot_tree) {
      index = *a.dot_tree;
      if (index >= snap.trees.size()) throw UsageError("--dot-tree beyond population size");
    } else {
      index = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
    }
    const fs::path path = dir / "effective.dot";
    const DotCounts counts = export_effective_dot(snap.trees[index], classes[index], path);
    written.push_back(path);
    std::cout << "tree " << index << ": " << counts.effective << " effective of " << snap.trees[index].size()
              << " nodes, " << counts.boundary_constants << " constant boundaries\n";
  }
  if (!a.updown_csv.empty()) {
    std::vector<GenerationStats> log;
    for (auto& row : read_generation_csv(a.updown_csv)) log.push_back(row.stats);
    const auto conv = first_convergence(log);
    auto out = open_artifact(dir, "updown.csv", written);
    if (conv) {
      out << "# first_convergence=" << *conv << '\n';
      write_updown_csv(size_change_vs_runts(log, *conv), out);
    } else {
      out << "# first_convergence=none\n";
      write_updown_csv({}, out);
    }
    close_artifact(out, written.back());
  }
  if (!a.runts_csv.empty()) {
    const auto events = read_runt_events_csv(a.runts_csv);
    auto out = open_artifact(dir, "runt_report.csv", written);
    write_runt_report_csv(runt_parent_report(events), out);
    close_artifact(out, written.back());
  }
  for (const fs::path& p : written) std::cout << "wrote " << p.string() << '\n';
  return kExitOk;
}

// --- theory -----------------------------------------------------------------

struct TheoryArgs {
  std::string curve;
  std::uint64_t pop = 500;
  int k = 7;
  std::string x = "0..20";
  std::string n = "0..100";
  std::optional<double> mean;
  std::optional<double> pa;
  bool by_nodes = false;
};

int cmd_theory(const TheoryArgs& a) {
  std::ostream& out = std::cout;
  if (a.curve == "tournament") {
    out << "x,y\n";
    for (std::uint64_t x : integer_steps(parse_range(a.x, "--x"), "--x")) {
      out << x << ',' << format_real(expected_fitness_tournaments(static_cast<double>(x), static_cast<double>(a.pop), a.k))
          << '\n';
    }
  } else if (a.curve == "limiting") {
    if (a.mean.has_value() == a.pa.has_value()) throw UsageError("--curve limiting needs exactly one of --mean, --pa");
    const LimitingSizeDistribution dist =
        a.mean ? LimitingSizeDistribution::fit_to_mean(*a.mean) : LimitingSizeDistribution(*a.pa);
    out << "# p_a=" << format_real(dist.p_internal()) << '\n';
    out << (a.by_nodes ? "nodes,pmf\n" : "internal,pmf\n");
    for (std::uint64_t n : integer_steps(parse_range(a.n, "--n"), "--n")) {
      const double y = a.by_nodes ? limiting_size_pmf_by_nodes(n, dist.p_internal())
                                  : limiting_size_pmf(n, dist.p_internal());
      out << n << ',' << format_real(y) << '\n';
    }
  } else if (a.curve == "flajolet") {
    out << "internal,depth\n";
    for (std::uint64_t n : integer_steps(parse_range(a.n, "--n"), "--n")) {
      if (n == 0) continue;
      out << n << ',' << format_real(flajolet_expected_depth(n)) << '\n';
    }
  } else {
    throw UsageError("unknown curve '" + a.curve + "' (tournament, limiting, flajolet)");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Long-term evolution of 6-multiplexer trees"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run an experiment");
  add_run_flags(*run, run_args);

  ReplayArgs replay_args;
  CLI::App* replay = app.add_subcommand("replay", "continue breeding from a snapshot");
  replay->add_option("snapshot", replay_args.snapshot, "snapshot file")->required();
  replay->add_option("--seed", replay_args.seed, "seed (default: the snapshot's)");
  replay->add_option("--gens", replay_args.gens, "generations to breed");
  replay->add_option("--out", replay_args.out, "output directory (default: none)");
  replay->add_option("--workers", replay_args.workers, "evaluation threads");
  replay->add_option("--cadence", replay_args.cadence, "generations between census passes");
  replay->add_option("--size-limit", replay_args.size_limit, "node count that ends the run, or none");
  replay->add_flag("--no-selection", replay_args.no_selection, "uniform parent choice");

  AnalyzeArgs an;
  CLI::App* analyze = app.add_subcommand("analyze", "tables from a snapshot or run log");
  analyze->add_option("snapshot", an.snapshot, "snapshot file");
  analyze->add_option("--out", an.out, "directory for the produced tables");
  analyze->add_flag("--census", an.census, "constant, intron and effective node totals");
  analyze->add_flag("--effective", an.effective, "per-tree effective code sizes");
  analyze->add_flag("--solutions", an.solutions, "per-tree counts of fitness-64 subtrees");
  analyze->add_flag("--scatter", an.scatter, "size v. depth points");
  analyze->add_flag("--subtrees", an.subtrees, "include subtree points in --scatter");
  analyze->add_option("--sample-rate", an.sample_rate, "fraction of subtrees reported by --scatter")
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_flag("--histogram", an.histogram, "log-decile size histogram against the limiting distribution");
  analyze->add_flag("--mean-fit", an.mean_fit, "fit the reference to the population mean size (default)");
  analyze->add_option("--pa", an.pa, "reference internal-node probability instead of --mean-fit");
  analyze->add_flag("--overlap", an.overlap, "effective code paths shared across the best trees");
  analyze->add_option("--overlap-threshold", an.overlap_threshold, "fraction of best trees a shared path needs")
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_flag("--dot", an.dot, "DOT graph of one tree's effective code");
  analyze->add_option("--dot-tree", an.dot_tree, "tree index for --dot (default: first best)");
  analyze->add_option("--updown", an.updown_csv, "run.csv: mean size rises and falls v. runt count")
      ->check(CLI::ExistingFile);
  analyze->add_option("--runts", an.runts_csv, "runts.csv: runt parentage report")->check(CLI::ExistingFile);

  TheoryArgs th;
  CLI::App* theory = app.add_subcommand("theory", "reference curves as CSV on stdout");
  theory->add_option("--curve", th.curve, "tournament, limiting or flajolet")->required();
  theory->add_option("--pop", th.pop, "population size (tournament)");
  theory->add_option("--k", th.k, "tournament size (tournament)");
  theory->add_option("--x", th.x, "runt counts a..b (tournament)");
  theory->add_option("--n", th.n, "sizes a..b (limiting, flajolet)");
  theory->add_option("--mean", th.mean, "mean tree size to fit (limiting)");
  theory->add_option("--pa", th.pa, "internal-node probability (limiting)");
  theory->add_flag("--nodes", th.by_nodes, "index the limiting pmf by total node count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : static_cast<int>(ErrorKind::usage);
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*replay) return cmd_replay(replay_args);
    if (*analyze) return cmd_analyze(an);
    if (*theory) return cmd_theory(th);
  } catch (const FormatError& e) {
    std::cerr << "format error at byte " << e.offset() << ": " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::usage);
  }
  return static_cast<int>(ErrorKind::usage);
}
