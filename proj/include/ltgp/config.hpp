#pragma once

#include <filesystem>
#include <string_view>

#include "ltgp/breeder.hpp"

namespace ltgp {

/// Sets one RunConfig field from its key=value spelling. Keys are the field
/// names (popsize, tournament_size, generations, size_limit, init_depth_lo,
/// init_depth_hi, seed, selection_enabled, stats_cadence, extended_mode,
/// memory_budget_bytes, workers, checkpoint_every, out_dir). size_limit and
/// memory_budget_bytes accept "none". Throws UsageError.
void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value);

/// Reads a line-oriented key=value file over `base`; '#' starts a comment.
/// extended_mode=true applies the extended defaults before later keys.
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

}  // namespace ltgp
