#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "wmbridge/grid.hpp"

namespace wmb {

namespace fs = std::filesystem;

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class ScenarioKind {
  classical_quantum_bridge,
  dispersion_free_newton,
  operator_roundtrip,
  uncertainty_survey,
  bohm_double_slit,
  pauli_precession,
  observer_coupling,
  mixture_trace
};

const std::vector<std::string>& scenario_names();
std::string scenario_name(ScenarioKind kind);

/// One line of a report. `relation` is "within" (|a - b| <= tolerance),
/// "at_most" (a <= b), "at_least" (a >= b) or "below" (a < b).
struct ReportEntry {
  std::string name;
  double value_a = 0.0;
  double value_b = 0.0;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  std::string relation = "within";
  bool pass = false;
};

struct ComparisonReport {
  std::vector<ReportEntry> entries;

  bool pass() const;
  void within(const std::string& name, double a, double b, double tolerance);
  void at_most(const std::string& name, double a, double bound);
  void at_least(const std::string& name, double a, double bound);
  void below(const std::string& name, double a, double bound);

  nlohmann::json to_json() const;
  static ComparisonReport from_json(const nlohmann::json& j);
  std::string summary() const;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::classical_quantum_bridge;
  /// The document as given.
  nlohmann::json input;
  /// Defaults merged with the input; every key present.
  nlohmann::json resolved;
  PhysicsParams physics;
  fs::path output;
  std::uint64_t rng_seed = 0;
};

/// Full default document for a scenario; doubles as its schema.
nlohmann::json scenario_defaults(ScenarioKind kind);

/// Throws SchemaError (with a JSON pointer) for unknown keys, wrong types,
/// unknown scenario or potential names.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const fs::path& path);

struct RunResult {
  fs::path directory;
  ComparisonReport report;
};

/// Runs one scenario and writes its artifact tree under config.output:
/// config.json (input echo), manifest.json, report.json, summary.txt,
/// observables.json, quantities.json and scenario-specific fields/,
/// trajectories/ and CSV files. An existing directory is reused only if it
/// holds a previous run.
RunResult run_scenario(const ScenarioConfig& config);

/// Field and observable differences between two run directories.
/// metrics: {"fields": bool, "observables": bool, "tolerance": number,
/// "field_tolerance": number, "require_same_physics": bool}.
/// Throws IncompatibleRuns when scenarios differ, physics differ (if
/// required) or field grids cannot be aligned.
ComparisonReport compare_runs(const fs::path& dir_a, const fs::path& dir_b,
                              const nlohmann::json& metrics = nlohmann::json::object());

/// Names of the exportable tables of a run.
std::vector<std::string> available_quantities(const fs::path& run_dir);

/// Writes <run_dir>/exports/<quantity>.csv and returns its path. Throws
/// MissingQuantity naming the available keys.
fs::path export_plot_data(const fs::path& run_dir, const std::string& quantity);

}  // namespace wmb
