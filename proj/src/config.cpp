#include "ltgp/config.hpp"

#include <charconv>
#include <fstream>
#include <string>

#include "ltgp/error.hpp"

namespace ltgp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T to_int(std::string_view key, std::string_view value) {
  T v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  throw UsageError("invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::optional<std::uint64_t> to_optional(std::string_view key, std::string_view value) {
  if (value == "none") return std::nullopt;
  return to_int<std::uint64_t>(key, value);
}

}  // namespace

void apply_config_entry(RunConfig& c, std::string_view key, std::string_view value) {
  if (key == "popsize") {
    c.popsize = to_int<std::uint64_t>(key, value);
  } else if (key == "tournament_size") {
    c.tournament_size = to_int<int>(key, value);
  } else if (key == "generations") {
    c.generations = to_int<std::uint64_t>(key, value);
  } else if (key == "size_limit") {
    c.size_limit = to_optional(key, value);
  } else if (key == "init_depth_lo") {
    c.init_depth_lo = to_int<int>(key, value);
  } else if (key == "init_depth_hi") {
    c.init_depth_hi = to_int<int>(key, value);
  } else if (key == "seed") {
    c.seed = to_int<std::uint64_t>(key, value);
  } else if (key == "selection_enabled") {
    c.selection_enabled = to_bool(key, value);
  } else if (key == "stats_cadence") {
    c.stats_cadence = to_int<std::uint64_t>(key, value);
  } else if (key == "extended_mode") {
    if (to_bool(key, value)) c.apply_extended();
  } else if (key == "memory_budget_bytes") {
    c.memory_budget_bytes = to_optional(key, value);
  } else if (key == "workers") {
    c.workers = to_int<unsigned>(key, value);
  } else if (key == "checkpoint_every") {
    c.checkpoint_every = to_int<std::uint64_t>(key, value);
  } else if (key == "out_dir") {
    c.out_dir = std::string(value);
  } else {
    throw UsageError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_config_entry(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

}  // namespace ltgp
