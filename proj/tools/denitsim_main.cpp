// Command-line front end: simulate / compare / calibrate / gen-influent.
// Exit codes: 0 success, 2 configuration error, 3 numerical fault.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "denitsim/config.hpp"
#include "denitsim/errors.hpp"
#include "denitsim/scenario.hpp"
#include "denitsim/version.hpp"

namespace {

using namespace denitsim;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_window_stats(const RunResult& r) {
  const Window w = evaluation_window(r.spec);
  const SummaryStats no2 = summarize_rows(r.rows, &LogRow::NO2_out, w);
  const SummaryStats meoh = summarize_rows(r.rows, &LogRow::meoh, w);
  std::cout << "window [" << w.t_start << ", " << w.t_end << "] d: "
            << "NO2_out mean " << no2.mean << " median " << no2.median
            << " min " << no2.min << " max " << no2.max
            << " gN/m3; methanol mean " << meoh.mean << " kg/d\n";
}

int cmd_simulate(const std::string& config_path, const std::string& out_csv,
                 const std::string& out_summary) {
  ScenarioSpec spec = load_scenario(config_path);
  if (!out_csv.empty()) spec.run.output_csv = out_csv;
  if (!out_summary.empty()) spec.run.output_summary = out_summary;

  const RunResult r = run_scenario(spec);
  if (!spec.run.output_csv.empty()) {
    write_file(spec.run.output_csv, timeseries_csv(r.rows));
  }
  if (!spec.run.output_summary.empty()) {
    write_file(spec.run.output_summary, summary_json(r).dump(2) + "\n");
  }
  std::cout << "simulate: " << control_mode_name(spec.mode) << ", "
            << spec.run.duration << " d, spec " << r.spec_hash << "\n";
  print_window_stats(r);
  if (spec.run.output_csv.empty() && spec.run.output_summary.empty()) {
    std::cout << summary_json(r).dump(2) << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_csv, const std::string& out_report) {
  const ScenarioSpec spec_a = load_scenario(path_a);
  const ScenarioSpec spec_b = load_scenario(path_b);
  const RunResult a = run_scenario(spec_a);
  const RunResult b = run_scenario(spec_b);
  const ComparisonReport rep =
      compare(a, b, control_mode_name(spec_a.mode), control_mode_name(spec_b.mode));

  if (!out_csv.empty()) {
    write_file(out_csv, combined_csv(a, b, rep.a.label, rep.b.label));
  }
  const std::string report = report_json(rep).dump(2) + "\n";
  if (!out_report.empty()) {
    write_file(out_report, report);
  } else {
    std::cout << report;
  }
  std::cout << "compare: NO2 range ratio (b/a) " << rep.no2_range_ratio
            << ", methanol delta " << rep.methanol_delta_pct << " %\n";
  return 0;
}

int cmd_calibrate(const std::string& config_path, double target, double k_lo,
                  double k_hi, double tol, const std::string& out_report) {
  const ScenarioSpec spec = load_scenario(config_path);
  const CalibrationResult c =
      calibrate_classical(spec, target, k_lo, k_hi, tol);
  const std::string report =
      calibration_json(c, spec, target, tol).dump(2) + "\n";
  if (!out_report.empty()) write_file(out_report, report);
  std::cout << report;
  return 0;
}

int cmd_gen_influent(const std::string& config_path, const std::string& out) {
  const ScenarioSpec spec = load_scenario(config_path);
  const std::string csv = influent_csv(spec);
  if (!out.empty()) {
    write_file(out, csv);
    std::cout << "gen-influent: wrote " << out << "\n";
  } else {
    std::cout << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-denitrification biofilter simulator"};
  app.set_version_flag("--version", std::string(denitsim::kVersion));
  app.require_subcommand(1);

  std::string config_path, config_b, out_csv, out_summary, out_report;
  double target = 0.8, k_lo = 3.0, k_hi = 8.0, tol = 0.02;

  CLI::App* sim = app.add_subcommand("simulate", "Run one scenario");
  sim->add_option("config", config_path, "Scenario JSON")->required();
  sim->add_option("--csv", out_csv, "Time-series CSV path (overrides config)");
  sim->add_option("--summary", out_summary,
                  "Summary JSON path (overrides config)");

  CLI::App* cmp = app.add_subcommand(
      "compare", "Run two scenarios against the same influent and report");
  cmp->add_option("config_a", config_path, "Reference scenario JSON")
      ->required();
  cmp->add_option("config_b", config_b, "Candidate scenario JSON")->required();
  cmp->add_option("--csv", out_csv, "Combined CSV path");
  cmp->add_option("--report", out_report, "Report JSON path (default stdout)");

  CLI::App* cal = app.add_subcommand(
      "calibrate", "Bisect the classical feedforward ratio K to a target "
                   "mean effluent NO2");
  cal->add_option("config", config_path, "Scenario JSON")->required();
  cal->add_option("--target", target, "Target mean NO2, gN/m3")->required();
  cal->add_option("--k-lo", k_lo, "Lower bracket for K");
  cal->add_option("--k-hi", k_hi, "Upper bracket for K");
  cal->add_option("--tol", tol, "Tolerance on the achieved mean");
  cal->add_option("--report", out_report, "Report JSON path");

  CLI::App* gen = app.add_subcommand(
      "gen-influent", "Emit the influent time series a scenario would see");
  gen->add_option("config", config_path, "Scenario JSON")->required();
  gen->add_option("--out", out_csv, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_csv, out_summary);
    if (cmp->parsed()) {
      return cmd_compare(config_path, config_b, out_csv, out_report);
    }
    if (cal->parsed()) {
      return cmd_calibrate(config_path, target, k_lo, k_hi, tol, out_report);
    }
    if (gen->parsed()) return cmd_gen_influent(config_path, out_csv);
  } catch (const denitsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const denitsim::NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
