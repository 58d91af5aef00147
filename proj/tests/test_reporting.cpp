#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ltgp/analysis.hpp"
#include "ltgp/breeder.hpp"
#include "ltgp/config.hpp"
#include "ltgp/error.hpp"
#include "ltgp/reporting.hpp"
#include "ltgp/theory.hpp"
#include "oracles.hpp"

using namespace ltgp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ltgp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string snapshot_bytes(std::span<const Tree> trees, const SnapshotMeta& meta) {
  std::ostringstream out(std::ios::binary);
  write_snapshot(out, trees, meta);
  return out.str();
}

std::size_t format_offset(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    read_snapshot(in);
  } catch (const FormatError& e) {
    return e.offset();
  }
  FAIL("expected FormatError");
  return 0;
}

void put_u64(std::string& s, std::size_t at, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

}  // namespace

TEST_CASE("snapshot round trip is bit-exact") {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Tree> trees;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) trees.push_back(uniform_random_binary_tree(rng() % 300, rng));
    const SnapshotMeta meta{kSnapshotVersion, rng() % 100000, rng()};
    const std::string bytes = snapshot_bytes(trees, meta);
    std::istringstream in(bytes, std::ios::binary);
    const Snapshot s = read_snapshot(in);
    REQUIRE(s.meta == meta);
    REQUIRE(s.trees == trees);
    REQUIRE(snapshot_bytes(s.trees, s.meta) == bytes);
  }
}

TEST_CASE("snapshot header layout") {
  const std::vector<Tree> trees = {Tree({Opcode::d0, Opcode::d1, Opcode::op_and})};
  const std::string b = snapshot_bytes(trees, {kSnapshotVersion, 0x0102030405060708ULL, 42});
  REQUIRE(b.size() == kSnapshotHeaderBytes + 8 + 3);
  CHECK(b.substr(0, 4) == "GPLT");
  CHECK(b[4] == 1);
  CHECK(b[8] == 0x08);
  CHECK(b[15] == 0x01);
  CHECK(b[16] == 1);  // popsize
  CHECK(b[20] == 42);
  CHECK(b[28] == 3);
  CHECK(b.substr(36) == std::string("\x00\x01\x06", 3));
}

TEST_CASE("snapshot format errors carry offsets") {
  const std::vector<Tree> trees = {Tree({Opcode::d0, Opcode::d1, Opcode::op_and}), Tree({Opcode::d4})};
  const std::string good = snapshot_bytes(trees, {kSnapshotVersion, 7, 9});
  const std::size_t first_len = kSnapshotHeaderBytes;
  const std::size_t first_payload = first_len + 8;
  const std::size_t second_len = first_payload + 3;

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(format_offset(bad_magic) == 0);

  std::string bad_version = good;
  bad_version[4] = 2;
  CHECK(format_offset(bad_version) == 4);

  std::string bad_opcode = good;
  bad_opcode[first_payload + 1] = 12;
  CHECK(format_offset(bad_opcode) == first_payload + 1);

  std::string unbalanced = good;
  unbalanced[first_payload + 2] = 3;  // D0 D1 D3: three values left
  CHECK(format_offset(unbalanced) == first_payload + 3);

  std::string zero_len = good;
  put_u64(zero_len, second_len, 0);
  CHECK(format_offset(zero_len) == second_len);

  std::string long_len = good;
  put_u64(long_len, second_len, 1000);
  CHECK(format_offset(long_len) == second_len);

  CHECK(format_offset(good.substr(0, good.size() - 1)) == second_len);
  CHECK(format_offset(good.substr(0, 10)) <= 10);
  CHECK(format_offset(good + "x") == good.size());
}

TEST_CASE("snapshot files") {
  const fs::path dir = scratch_dir("snap");
  const std::vector<Tree> trees = {oracle::correct_mux()};
  write_snapshot(dir / "s.bin", trees, {kSnapshotVersion, 3, 4});
  CHECK(read_snapshot(dir / "s.bin").trees == trees);
  CHECK_THROWS_AS(read_snapshot(dir / "missing.bin"), IoError);
  CHECK_THROWS_AS(write_snapshot(dir / "no" / "such" / "dir.bin", trees, {}), IoError);
}

TEST_CASE("generation csv schema and round trip") {
  const fs::path dir = scratch_dir("csv");
  const RunLog log = [] {
    RunConfig c;
    c.popsize = 40;
    c.generations = 40;
    c.stats_cadence = 10;
    return run_experiment(c);
  }();
  write_generation_csv(log.generations, dir / "run.csv");
  std::ifstream in(dir / "run.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "gen,mean_size,min_size,max_size,mean_depth,best_fitness,runt_count,mean_effective,constant_fraction,"
        "solution_subtrees_mean,wti_observed,wti_expected,runt_count_smoothed30");
  std::string row1;
  std::getline(in, row1);
  CHECK(row1.find(",,") == std::string::npos);  // generation 0 is a census generation
  std::string row2;
  std::getline(in, row2);
  CHECK(row2.find(",,,") != std::string::npos);

  const auto rows = read_generation_csv(dir / "run.csv");
  REQUIRE(rows.size() == log.generations.size());
  double window = 0;
  for (std::size_t g = 0; g < rows.size(); ++g) {
    const GenerationStats& a = rows[g].stats;
    const GenerationStats& b = log.generations[g];
    CHECK(a.generation == b.generation);
    CHECK(a.runt_count == b.runt_count);
    CHECK(a.mean_size == doctest::Approx(b.mean_size).epsilon(1e-8));
    CHECK(a.mean_effective.has_value() == b.mean_effective.has_value());
    window += static_cast<double>(b.runt_count);
    if (g >= 30) window -= static_cast<double>(log.generations[g - 30].runt_count);
    CHECK(rows[g].runt_count_smoothed30 == doctest::Approx(window / static_cast<double>(std::min<std::size_t>(g + 1, 30))));
  }

  std::ofstream(dir / "bad.csv") << "gen,mean\n1,2\n";
  CHECK_THROWS_AS(read_generation_csv(dir / "bad.csv"), FormatError);
  CHECK_THROWS_AS(read_generation_csv(dir / "absent.csv"), IoError);
}

TEST_CASE("runt events csv round trip") {
  const fs::path dir = scratch_dir("runts");
  std::vector<RuntEvent> events = {{3, 10, 60, 12, 64, 40, 64, 25.5}, {9, 100, 1, 90, 64, 3, 63, 88.25}};
  write_runt_events_csv(events, dir / "runts.csv");
  const auto back = read_runt_events_csv(dir / "runts.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].generation == 9);
  CHECK(back[1].dad_fitness == 63);
  CHECK(back[0].parent_mean_size == 25.5);
}

TEST_CASE("format_real") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(123456789.0) == "123456789");
  CHECK(format_real(1.0 / 3) == "0.333333333");
}

TEST_CASE("effective code dot export") {
  const Tree t = oracle::parse("OR(D0,NOR(D4,OR(D5,NAND(D5,D5))))");
  std::ostringstream out;
  const DotCounts counts = export_effective_dot(t, classify_nodes(t), out);
  CHECK(counts.effective == 3);
  CHECK(counts.boundary_constants == 1);  // OR(D5, NAND(D5,D5)) under the NOR
  CHECK(counts.nodes == 4);
  CHECK(counts.edges == 3);
  const std::string dot = out.str();
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("NOR") != std::string::npos);
  CHECK(dot.find("D4") == std::string::npos);
}

TEST_CASE("dot export of small fixtures") {
  std::ostringstream a, b;
  const Tree plain({Opcode::d0, Opcode::d1, Opcode::op_and});
  const DotCounts pc = export_effective_dot(plain, classify_nodes(plain), a);
  CHECK(pc.nodes == 3);
  CHECK(pc.edges == 2);
  const Tree intron = oracle::parse("AND(D5,AND(D0,NOR(D0,D0)))");
  const NodeClassification ic = classify_nodes(intron);
  const DotCounts dc = export_effective_dot(intron, ic, b);
  CHECK(dc.nodes == 2);
  CHECK(dc.edges == 1);
  CHECK(dc.effective == ic.effective_count);
  CHECK(b.str().find("D5") == std::string::npos);
}

TEST_CASE("analysis tables have headers and one row per item") {
  std::ostringstream out;
  const std::vector<SizeDepthPoint> points = {{7, 3, true}, {3, 1, false}};
  write_scatter_csv(points, out);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 3);
}

TEST_CASE("config files") {
  const fs::path dir = scratch_dir("cfg");
  std::ofstream(dir / "run.cfg") << "# comment\npopsize = 64\nseed=12  # trailing\nsize_limit=none\n"
                                    "selection_enabled=false\nout_dir=/tmp/x\n";
  const RunConfig c = load_run_config(dir / "run.cfg");
  CHECK(c.popsize == 64);
  CHECK(c.seed == 12);
  CHECK_FALSE(c.size_limit);
  CHECK_FALSE(c.selection_enabled);
  CHECK(c.out_dir == "/tmp/x");

  std::ofstream(dir / "ext.cfg") << "extended_mode=true\ngenerations=20\n";
  const RunConfig e = load_run_config(dir / "ext.cfg");
  CHECK(e.popsize == 50);
  CHECK(e.generations == 20);

  RunConfig x;
  CHECK_THROWS_AS(apply_config_entry(x, "colour", "blue"), UsageError);
  CHECK_THROWS_AS(apply_config_entry(x, "popsize", "many"), UsageError);
  std::ofstream(dir / "broken.cfg") << "popsize\n";
  CHECK_THROWS_AS(load_run_config(dir / "broken.cfg"), UsageError);
  CHECK_THROWS_AS(load_run_config(dir / "none.cfg"), IoError);
}
