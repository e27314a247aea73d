#pragma once

// Config-driven scenario runner.  A scenario is a JSON object with a "kind"
// tag and per-kind parameters (see docs/config.md); running it produces a
// JSON report with one entry per acceptance check and optional CSV tables.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gerbelab {

const std::vector<std::string>& scenario_kinds();
const char* version_string();

struct RunOptions {
  std::optional<std::int64_t> seed;  // overrides the config seed
  std::optional<double> tol;         // overrides every non-exact tolerance
  std::string name;                  // report base name when the config has none
  std::filesystem::path out_dir;     // empty: no files are written
  bool write_files = true;
};

struct ScenarioResult {
  nlohmann::json report;
  int exit_code = 0;  // 0 pass, 1 a check failed, 3 numerical/topological failure
  std::vector<std::filesystem::path> written;
};

/// Parses and validates the whole config first (SchemaError on unknown keys,
/// wrong types or out-of-range values), then runs the pipeline.  Module
/// failures are caught and reported with exit code 3.
ScenarioResult run_scenario(const nlohmann::json& config, const RunOptions& opts = {});

/// Validation only; returns the normalized config with defaults filled in.
nlohmann::json normalize_scenario(const nlohmann::json& config);

/// 17 significant digits, the CSV number format.
std::string format_double(double v);

/// Output directory: explicit value, else $GERBELAB_OUT, else ./gerbelab-out.
std::filesystem::path resolve_out_dir(const std::optional<std::string>& explicit_dir);

}  // namespace gerbelab
