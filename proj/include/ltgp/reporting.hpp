#pragma once

// Persistence and tables.
//
// Snapshot layout, all integers little-endian:
//   "GPLT"  u32 version  u64 generation  u32 popsize  u64 seed
//   then popsize times: u64 length, length opcode bytes (D0..D5 = 0..5,
//   AND = 6, OR = 7, NAND = 8, NOR = 9)
//
// Generation CSV columns (frozen, version 1):
//   gen,mean_size,min_size,max_size,mean_depth,best_fitness,runt_count,
//   mean_effective,constant_fraction,solution_subtrees_mean,wti_observed,
//   wti_expected,runt_count_smoothed30
// Census-only columns are empty on other generations. Reals carry 9
// significant digits.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ltgp/analysis.hpp"
#include "ltgp/genome.hpp"
#include "ltgp/stats.hpp"

namespace ltgp {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 4 + 4 + 8 + 4 + 8;

struct SnapshotMeta {
  std::uint32_t version = kSnapshotVersion;
  std::uint64_t generation = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const SnapshotMeta&, const SnapshotMeta&) = default;
};

struct Snapshot {
  SnapshotMeta meta;
  std::vector<Tree> trees;
};

/// Throws IoError.
void write_snapshot(const std::filesystem::path& path, std::span<const Tree> trees, const SnapshotMeta& meta);
void write_snapshot(std::ostream& out, std::span<const Tree> trees, const SnapshotMeta& meta);

/// Throws IoError when the file cannot be read and FormatError (with the byte
/// offset) for bad magic, unsupported version, truncated or inconsistent
/// lengths, ill-formed trees, or trailing bytes.
Snapshot read_snapshot(const std::filesystem::path& path);
Snapshot read_snapshot(std::istream& in);

std::string format_real(double v);

class GenerationCsvWriter {
 public:
  explicit GenerationCsvWriter(const std::filesystem::path& path);
  void write(const GenerationStats& stats);
  void flush();
  static const std::vector<std::string>& columns();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::deque<std::uint64_t> recent_runts_;
  std::uint64_t recent_sum_ = 0;
};

void write_generation_csv(std::span<const GenerationStats> stats, const std::filesystem::path& path);

struct GenerationCsvRow {
  GenerationStats stats;
  double runt_count_smoothed30 = 0.0;
};

/// Parses exactly the schema written above; FormatError otherwise.
std::vector<GenerationCsvRow> read_generation_csv(const std::filesystem::path& path);

void write_runt_events_csv(std::span<const RuntEvent> events, const std::filesystem::path& path);
std::vector<RuntEvent> read_runt_events_csv(const std::filesystem::path& path);

struct DotCounts {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;
  std::uint64_t effective = 0;
  std::uint64_t boundary_constants = 0;
};

/// Graph of the effective nodes plus their constant, ineffective children
/// (drawn as boxed boundary markers). Constant nodes are filled grey.
DotCounts export_effective_dot(const Tree& tree, const NodeClassification& classes, std::ostream& out);
DotCounts export_effective_dot(const Tree& tree, const NodeClassification& classes,
                               const std::filesystem::path& path);

// Analysis tables.
void write_census_csv(const CodeCensus& census, std::ostream& out);
void write_overlap_csv(const EffectiveCodeReport& report, std::ostream& out);
void write_scatter_csv(std::span<const SizeDepthPoint> points, std::ostream& out);
void write_histogram_csv(std::span<const DecileBin> bins, std::ostream& out);
void write_updown_csv(std::span<const UpDownRow> rows, std::ostream& out);
void write_runt_report_csv(const RuntParentReport& report, std::ostream& out);

}  // namespace ltgp
