#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "denitsim/biofilter.hpp"
#include "denitsim/control.hpp"
#include "denitsim/influent.hpp"
#include "denitsim/kinetics.hpp"
#include "denitsim/stats.hpp"

namespace denitsim {

enum class ControlMode { kClassical, kClassicalMfc };

const char* control_mode_name(ControlMode m);

struct RunConfig {
  double duration = 10.0;           // d
  double warmup = 5.0;              // d excluded from statistics
  double dt = 20.0 / 86400.0;       // d integrator step
  std::uint64_t seed = 42;          // master seed recorded in provenance
  std::string output_csv;           // empty: no file written
  std::string output_summary;      // empty: no file written

  void validate() const;
};

/// Influent comes from the synthetic profile or a measured CSV, never both.
struct InfluentSpec {
  InfluentProfile profile;
  std::string csv_path;
  bool use_csv = false;
};

/// Everything one run needs. Serializable to/from JSON (config module);
/// hashable for provenance.
struct ScenarioSpec {
  BiofilterConfig plant;
  KineticParams kinetics;
  InfluentSpec influent;
  ControlMode mode = ControlMode::kClassicalMfc;
  ClassicalConfig classical;
  MfcConfig mfc;
  SensorModel sensor;
  RunConfig run;

  /// Full cross-field validation: every sub-config, stoichiometric
  /// continuity to 1e-9, and the time grids (dt must divide the sample and
  /// control periods, the day, and the duration; t_bw must sit on the
  /// integrator grid). Throws ConfigError.
  void validate() const;
};

/// One output row, logged on the dt_sample grid from t = 0 to duration
/// inclusive. Concentrations are the true last-tank bulk values; what the
/// controller saw passes through the sensor and is not logged here.
struct LogRow {
  double t = 0.0;
  double Q = 0.0;
  double NO3_in = 0.0;
  double NO2_in = 0.0;
  double NO2_out = 0.0;
  double NO3_out = 0.0;
  double u_ff = 0.0;
  double u_corr = 0.0;
  double u_total = 0.0;
  double meoh = 0.0;   // kg methanol/d = u_total / 1.5
  double F_hat = 0.0;
  bool mfc_active = false;
  bool backwash = false;
};

inline constexpr const char* kTimeseriesCsvHeader =
    "t_d,Q_m3d,NO3_in,NO2_in,NO2_out,NO3_out,u_ff_kgCODd,u_corr_kgCODd,"
    "u_total_kgCODd,meoh_kgd,F_hat,mfc_active,backwash";

struct RunResult {
  ScenarioSpec spec;
  std::vector<LogRow> rows;
  std::string spec_hash;
  MassLedger sludge;
  FlowTotals totals;
  double clamp_cod_g = 0.0;
  double clamp_n_g = 0.0;
  PlantState final_state;
};

/// Runs one scenario to completion. Writes no files (the CLI layer does).
RunResult run_scenario(const ScenarioSpec& spec);

struct Window {
  double t_start = 0.0;
  double t_end = 0.0;
};

Window evaluation_window(const ScenarioSpec& spec);

std::vector<double> extract(const std::vector<LogRow>& rows,
                            double LogRow::*field, const Window& w);

SummaryStats summarize_rows(const std::vector<LogRow>& rows,
                            double LogRow::*field, const Window& w);

/// NO2_out + NO3_out.
SummaryStats summarize_nox(const std::vector<LogRow>& rows, const Window& w);

struct StrategySummary {
  std::string label;
  std::string spec_hash;
  SummaryStats no2, no3, nox, meoh, u_total;
};

struct ComparisonReport {
  StrategySummary a, b;
  Window window;
  double no2_range_ratio = 0.0;    // b range / a range
  double no2_mean_offset_a = 0.0;  // mean - y_set
  double no2_mean_offset_b = 0.0;
  double methanol_delta_pct = 0.0; // 100 * (b - a) / a on mean meoh
};

/// Rejects runs whose evaluation windows, sample grids, or influent
/// sources/seeds differ: offset and delta statistics are only meaningful
/// against the same disturbance realization.
ComparisonReport compare(const RunResult& a, const RunResult& b,
                         const std::string& label_a,
                         const std::string& label_b);

struct CalibrationResult {
  double K_star = 0.0;
  double achieved_mean = 0.0;
  int iterations = 0;
  std::vector<std::pair<double, double>> evals;  // (K, mean NO2)
};

/// Bisects the feedforward ratio K of a classical-only variant of `base`
/// until the evaluation-window mean effluent NO2 hits `target` within
/// `tol`. Requires the target bracketed on the descending branch:
/// mean(k_lo) > target > mean(k_hi). Each evaluation is a full run.
CalibrationResult calibrate_classical(const ScenarioSpec& base, double target,
                                      double k_lo, double k_hi, double tol,
                                      int max_iter = 40);

/// The pinned 13-column time series (used by `simulate`; byte-stable).
std::string timeseries_csv(const std::vector<LogRow>& rows);

/// The pinned header plus a trailing `strategy` label column (used by
/// `compare`, which interleaves two runs into one file).
std::string combined_csv(const RunResult& a, const RunResult& b,
                         const std::string& label_a,
                         const std::string& label_b);

std::string influent_csv(const ScenarioSpec& spec);

void write_file(const std::string& path, const std::string& content);

}  // namespace denitsim
