#pragma once

#include <string>

#include <json.hpp>

#include "denitsim/scenario.hpp"

namespace denitsim {

/// Parses a scenario from JSON. Every key is optional (defaults apply);
/// unknown keys inside known sections are rejected so typos fail loudly.
/// Top-level sections: "plant", "kinetics", "influent", "control", "run",
/// "sensor". Throws ConfigError with the offending key path.
ScenarioSpec parse_scenario(const nlohmann::json& j);

/// Reads and parses a JSON file.
ScenarioSpec load_scenario(const std::string& path);

/// Canonical JSON for a spec (alphabetical keys, full precision). Output
/// paths are not part of a scenario's identity and are omitted.
nlohmann::json scenario_json(const ScenarioSpec& spec);

/// FNV-1a 64-bit over the canonical JSON, as fixed-width hex.
std::string spec_hash(const ScenarioSpec& spec);

nlohmann::json stats_json(const SummaryStats& s);
nlohmann::json summary_json(const RunResult& r);
nlohmann::json report_json(const ComparisonReport& rep);
nlohmann::json calibration_json(const CalibrationResult& c,
                                const ScenarioSpec& spec, double target,
                                double tol);

}  // namespace denitsim
