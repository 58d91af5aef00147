#include "ltgp/reporting.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "ltgp/error.hpp"
#include "ltgp/kernels.hpp"

namespace ltgp {

namespace {

constexpr std::array<char, 4> kMagic = {'G', 'P', 'L', 'T'};
constexpr std::size_t kSmoothWindow = 30;

template <class T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint64_t offset() const noexcept { return offset_; }

  template <class T>
  T get_le(const char* field) {
    std::array<unsigned char, sizeof(T)> buf{};
    read_raw(reinterpret_cast<char*>(buf.data()), buf.size(), field);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
  }

  void read_raw(char* dst, std::size_t n, const char* field) {
    const std::uint64_t at = offset_;
    in_.read(dst, static_cast<std::streamsize>(n));
    const auto got = static_cast<std::size_t>(in_.gcount());
    offset_ += got;
    if (got != n) throw FormatError(std::string("truncated snapshot reading ") + field, at);
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

// Bytes left in the stream, or max if it cannot seek.
std::uint64_t remaining_bytes(std::istream& in) {
  const auto here = in.tellg();
  if (here < 0) return UINT64_MAX;
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  in.seekg(here);
  if (end < 0) return UINT64_MAX;
  return static_cast<std::uint64_t>(end - here);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

template <class T>
T parse_int(const std::string& s, std::uint64_t line, const char* column) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("bad integer in column " + std::string(column) + " on line " + std::to_string(line), line);
  }
  return v;
}

double parse_real(const std::string& s, std::uint64_t line, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError("bad number in column " + std::string(column) + " on line " + std::to_string(line), line);
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, std::uint64_t line, const char* column) {
  if (s.empty()) return std::nullopt;
  return parse_real(s, line, column);
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_snapshot(std::ostream& out, std::span<const Tree> trees, const SnapshotMeta& meta) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, meta.version);
  put_le<std::uint64_t>(out, meta.generation);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(trees.size()));
  put_le<std::uint64_t>(out, meta.seed);
  for (const Tree& t : trees) {
    put_le<std::uint64_t>(out, t.size());
    const auto bytes = t.bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

void write_snapshot(const std::filesystem::path& path, std::span<const Tree> trees, const SnapshotMeta& meta) {
  std::ofstream out = open_out(path, std::ios::binary | std::ios::trunc);
  write_snapshot(out, trees, meta);
  out.flush();
  if (!out) throw IoError("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(std::istream& in) {
  Reader r(in);
  std::array<char, 4> magic{};
  r.read_raw(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw FormatError("bad snapshot magic", 0);
  Snapshot snap;
  const std::uint64_t version_at = r.offset();
  snap.meta.version = r.get_le<std::uint32_t>("version");
  if (snap.meta.version == 0 || snap.meta.version > kSnapshotVersion) {
    throw FormatError("unsupported snapshot version " + std::to_string(snap.meta.version), version_at);
  }
  snap.meta.generation = r.get_le<std::uint64_t>("generation");
  const std::uint32_t popsize = r.get_le<std::uint32_t>("popsize");
  snap.meta.seed = r.get_le<std::uint64_t>("seed");
  snap.trees.reserve(popsize);
  std::uint64_t remaining = remaining_bytes(in);
  for (std::uint32_t t = 0; t < popsize; ++t) {
    const std::uint64_t length_at = r.offset();
    const std::uint64_t length = r.get_le<std::uint64_t>("tree length");
    if (remaining != UINT64_MAX) remaining -= 8;
    if (length == 0) throw FormatError("tree " + std::to_string(t) + " has zero length", length_at);
    if (length > remaining) {
      throw FormatError("tree " + std::to_string(t) + " length " + std::to_string(length) +
                            " exceeds remaining payload",
                        length_at);
    }
    const std::uint64_t payload_at = r.offset();
    std::vector<Opcode> nodes(length);
    r.read_raw(reinterpret_cast<char*>(nodes.data()), length, "tree payload");
    if (remaining != UINT64_MAX) remaining -= length;
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(nodes.data()), nodes.size());
    if (auto bad = kernels::first_malformed(bytes)) {
      throw FormatError("tree " + std::to_string(t) + " is not a well-formed postfix tree", payload_at + *bad);
    }
    snap.trees.push_back(Tree::adopt_unchecked(std::move(nodes)));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last tree", r.offset());
  return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.9g", v);
  return buf.data();
}

const std::vector<std::string>& GenerationCsvWriter::columns() {
  static const std::vector<std::string> cols = {
      "gen",         "mean_size",         "min_size",
      "max_size",    "mean_depth",        "best_fitness",
      "runt_count",  "mean_effective",    "constant_fraction",
      "solution_subtrees_mean", "wti_observed", "wti_expected",
      "runt_count_smoothed30"};
  return cols;
}

GenerationCsvWriter::GenerationCsvWriter(const std::filesystem::path& path) : out_(open_out(path)), path_(path) {
  const auto& cols = columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
}

void GenerationCsvWriter::write(const GenerationStats& s) {
  recent_runts_.push_back(s.runt_count);
  recent_sum_ += s.runt_count;
  if (recent_runts_.size() > kSmoothWindow) {
    recent_sum_ -= recent_runts_.front();
    recent_runts_.pop_front();
  }
  const double smoothed = static_cast<double>(recent_sum_) / static_cast<double>(recent_runts_.size());
  out_ << s.generation << ',' << format_real(s.mean_size) << ',' << s.min_size << ',' << s.max_size << ','
       << format_real(s.mean_depth) << ',' << s.best_fitness << ',' << s.runt_count << ','
       << optional_real(s.mean_effective) << ',' << optional_real(s.constant_fraction) << ','
       << optional_real(s.solution_subtrees_mean) << ',' << s.wti_observed << ',' << format_real(s.wti_expected)
       << ',' << format_real(smoothed) << '\n';
  if (!out_) throw IoError("failed writing " + path_.string() + " at generation " + std::to_string(s.generation));
}

void GenerationCsvWriter::flush() {
  out_.flush();
  if (!out_) throw IoError("failed flushing " + path_.string());
}

void write_generation_csv(std::span<const GenerationStats> stats, const std::filesystem::path& path) {
  GenerationCsvWriter writer(path);
  for (const GenerationStats& s : stats) writer.write(s);
  writer.flush();
}

std::vector<GenerationCsvRow> read_generation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty generation CSV", 0);
  if (split_csv(line) != GenerationCsvWriter::columns()) throw FormatError("unexpected generation CSV header", 1);
  std::vector<GenerationCsvRow> rows;
  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != GenerationCsvWriter::columns().size()) {
      throw FormatError("wrong column count on line " + std::to_string(line_no), line_no);
    }
    GenerationCsvRow row;
    GenerationStats& s = row.stats;
    s.generation = parse_int<std::uint64_t>(c[0], line_no, "gen");
    s.mean_size = parse_real(c[1], line_no, "mean_size");
    s.min_size = parse_int<std::uint64_t>(c[2], line_no, "min_size");
    s.max_size = parse_int<std::uint64_t>(c[3], line_no, "max_size");
    s.mean_depth = parse_real(c[4], line_no, "mean_depth");
    s.best_fitness = parse_int<int>(c[5], line_no, "best_fitness");
    s.runt_count = parse_int<std::uint64_t>(c[6], line_no, "runt_count");
    s.mean_effective = parse_optional(c[7], line_no, "mean_effective");
    s.constant_fraction = parse_optional(c[8], line_no, "constant_fraction");
    s.solution_subtrees_mean = parse_optional(c[9], line_no, "solution_subtrees_mean");
    s.wti_observed = parse_int<std::uint64_t>(c[10], line_no, "wti_observed");
    s.wti_expected = parse_real(c[11], line_no, "wti_expected");
    row.runt_count_smoothed30 = parse_real(c[12], line_no, "runt_count_smoothed30");
    rows.push_back(row);
  }
  return rows;
}

void write_runt_events_csv(std::span<const RuntEvent> events, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "gen,child_size,child_fitness,mum_size,mum_fitness,dad_size,dad_fitness,parent_mean_size\n";
  for (const RuntEvent& e : events) {
    out << e.generation << ',' << e.child_size << ',' << e.child_fitness << ',' << e.mum_size << ','
        << e.mum_fitness << ',' << e.dad_size << ',' << e.dad_fitness << ',' << format_real(e.parent_mean_size)
        << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RuntEvent> read_runt_events_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "gen,child_size,child_fitness,mum_size,mum_fitness,dad_size,dad_fitness,parent_mean_size") {
    throw FormatError("unexpected runt CSV header", 1);
  }
  std::vector<RuntEvent> events;
  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != 8) throw FormatError("wrong column count on line " + std::to_string(line_no), line_no);
    RuntEvent e;
    e.generation = parse_int<std::uint64_t>(c[0], line_no, "gen");
    e.child_size = parse_int<std::uint64_t>(c[1], line_no, "child_size");
    e.child_fitness = parse_int<int>(c[2], line_no, "child_fitness");
    e.mum_size = parse_int<std::uint64_t>(c[3], line_no, "mum_size");
    e.mum_fitness = parse_int<int>(c[4], line_no, "mum_fitness");
    e.dad_size = parse_int<std::uint64_t>(c[5], line_no, "dad_size");
    e.dad_fitness = parse_int<int>(c[6], line_no, "dad_fitness");
    e.parent_mean_size = parse_real(c[7], line_no, "parent_mean_size");
    events.push_back(e);
  }
  return events;
}

DotCounts export_effective_dot(const Tree& tree, const NodeClassification& classes, std::ostream& out) {
  DotCounts counts;
  out << "digraph effective {\n  node [fontname=\"Helvetica\"];\n";
  // Reverse postfix with a stack of parent indices gives each node's parent.
  constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parents;
  parents.push_back(kNoParent);
  for (std::size_t i = tree.size(); i-- > 0;) {
    const std::size_t parent = parents.back();
    parents.pop_back();
    const bool effective = classes.effective(i);
    const bool boundary = !effective && classes.constant(i) && parent != kNoParent && classes.effective(parent);
    if (effective || boundary) {
      out << "  n" << i << " [label=\"";
      if (boundary) {
        out << ((classes.flags[i] & kNodeConstantOnes) ? "1" : "0") << "\", shape=box, style=filled, fillcolor=grey";
        ++counts.boundary_constants;
      } else {
        out << opcode_name(tree[i]) << '"';
        if (classes.constant(i)) out << ", style=filled, fillcolor=grey";
        ++counts.effective;
      }
      out << "];\n";
      ++counts.nodes;
      if (parent != kNoParent) {
        out << "  n" << parent << " -> n" << i << ";\n";
        ++counts.edges;
      }
    }
    if (!is_leaf(tree[i])) {
      parents.push_back(i);
      parents.push_back(i);
    }
  }
  out << "}\n";
  return counts;
}

DotCounts export_effective_dot(const Tree& tree, const NodeClassification& classes,
                               const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  const DotCounts counts = export_effective_dot(tree, classes, out);
  if (!out) throw IoError("failed writing " + path.string());
  return counts;
}

void write_census_csv(const CodeCensus& c, std::ostream& out) {
  out << "trees,nodes,constants,introns,effective,constant_fraction,effective_fraction,mean_effective\n";
  out << c.trees << ',' << c.nodes << ',' << c.constants << ',' << c.introns << ',' << c.effective << ','
      << format_real(c.constant_fraction()) << ',' << format_real(c.effective_fraction()) << ','
      << format_real(c.mean_effective()) << '\n';
}

void write_overlap_csv(const EffectiveCodeReport& r, std::ostream& out) {
  out << "# trees_considered=" << r.trees_considered << " shared_core=" << r.shared_core
      << " threshold=" << format_real(r.threshold) << " mean_effective=" << format_real(r.mean_effective) << '\n';
  out << "path,depth,count,fraction\n";
  for (const auto& [path, count] : r.path_counts) {
    const double frac =
        r.trees_considered == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(r.trees_considered);
    out << render_path(path) << ',' << path.size() - 1 << ',' << count << ',' << format_real(frac) << '\n';
  }
}

void write_scatter_csv(std::span<const SizeDepthPoint> points, std::ostream& out) {
  out << "size,depth,whole_tree\n";
  for (const SizeDepthPoint& p : points) out << p.size << ',' << p.depth << ',' << (p.whole_tree ? 1 : 0) << '\n';
}

void write_histogram_csv(std::span<const DecileBin> bins, std::ostream& out) {
  out << "lo,hi,observed,expected,sigma,exceedance,flagged\n";
  for (const DecileBin& b : bins) {
    out << b.lo << ',' << b.hi << ',' << b.observed << ',' << format_real(b.expected) << ',' << format_real(b.sigma)
        << ',' << format_real(b.exceedance) << ',' << (b.flagged() ? 1 : 0) << '\n';
  }
}

void write_updown_csv(std::span<const UpDownRow> rows, std::ostream& out) {
  out << "runts,rises,falls,ratio,suppressed\n";
  for (const UpDownRow& r : rows) {
    out << r.runts << ',' << r.rises << ',' << r.falls << ',' << optional_real(r.ratio) << ','
        << (r.suppressed() ? 1 : 0) << '\n';
  }
}

void write_runt_report_csv(const RuntParentReport& r, std::ostream& out) {
  out << "# events=" << r.events << " mum_correlation=" << optional_real(r.mum_correlation)
      << " dad_correlation=" << optional_real(r.dad_correlation)
      << " mum_below_mean_fraction=" << format_real(r.mum_below_mean_fraction) << " smaller=" << r.smaller_than_mum
      << " larger=" << r.larger_than_mum << " same=" << r.same_as_mum << '\n';
  out << "change_lo,change_hi,count\n";
  for (const SizeChangeBin& b : r.size_change_histogram) out << b.lo << ',' << b.hi << ',' << b.count << '\n';
}

}  // namespace ltgp
