#include "denitsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>

#include "denitsim/config.hpp"
#include "denitsim/errors.hpp"

namespace denitsim {

namespace {

// Number of dt steps in `period`, requiring an integer fit.
long long steps_in(double period, double dt, const char* what) {
  const long long n = std::llround(period / dt);
  if (n < 1 || std::abs(static_cast<double>(n) * dt - period) >
                   1e-9 * std::max(1.0, period)) {
    throw ConfigError(std::string("run: ") + what +
                      " must be a positive integer multiple of dt");
  }
  return n;
}

void format_value(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  out += buf;
}

void format_row(std::string& out, const LogRow& r) {
  format_value(out, r.t);
  out += ',';
  format_value(out, r.Q);
  out += ',';
  format_value(out, r.NO3_in);
  out += ',';
  format_value(out, r.NO2_in);
  out += ',';
  format_value(out, r.NO2_out);
  out += ',';
  format_value(out, r.NO3_out);
  out += ',';
  format_value(out, r.u_ff);
  out += ',';
  format_value(out, r.u_corr);
  out += ',';
  format_value(out, r.u_total);
  out += ',';
  format_value(out, r.meoh);
  out += ',';
  format_value(out, r.F_hat);
  out += ',';
  out += r.mfc_active ? '1' : '0';
  out += ',';
  out += r.backwash ? '1' : '0';
  out += '\n';
}

}  // namespace

const char* control_mode_name(ControlMode m) {
  return m == ControlMode::kClassical ? "classical" : "classical+mfc";
}

void RunConfig::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(duration > 0.0, "duration must be > 0");
  require(warmup >= 0.0, "warmup must be >= 0");
  require(warmup < duration, "warmup must be < duration");
  require(dt > 0.0, "dt must be > 0");
  if (bad.tellp() > 0) throw ConfigError("run: " + bad.str());
}

void ScenarioSpec::validate() const {
  plant.validate();
  kinetics.validate();
  classical.validate();
  mfc.validate();
  sensor.validate();
  run.validate();
  if (influent.use_csv) {
    if (influent.csv_path.empty()) {
      throw ConfigError("influent: csv selected but no path given");
    }
  } else {
    influent.profile.validate();
  }

  const double residual =
      check_continuity(build_stoichiometry(kinetics), kinetics.i_XB).max_abs();
  if (residual > 1e-9) {
    throw ConfigError("kinetics: stoichiometric continuity residual " +
                      std::to_string(residual) + " exceeds 1e-9");
  }

  steps_in(run.duration, run.dt, "duration");
  steps_in(sensor.dt_sample, run.dt, "sensor.dt_sample");
  steps_in(mfc.dt_ctrl, run.dt, "mfc.dt_ctrl");
  steps_in(1.0, run.dt, "the day");
  if (plant.t_bw > 0.0) {
    const double k = plant.t_bw / run.dt;
    if (std::abs(k - std::round(k)) > 1e-6) {
      throw ConfigError("plant: t_bw must sit on the dt grid");
    }
  }
}

Window evaluation_window(const ScenarioSpec& spec) {
  return Window{spec.run.warmup, spec.run.duration};
}

RunResult run_scenario(const ScenarioSpec& spec) {
  spec.validate();

  // Influent source, shared by controller sampling and plant integration.
  std::shared_ptr<InfluentGenerator> gen;
  std::shared_ptr<CsvSeries> series;
  if (spec.influent.use_csv) {
    series = std::make_shared<CsvSeries>(load_timeseries(spec.influent.csv_path));
  } else {
    gen = std::make_shared<InfluentGenerator>(spec.influent.profile,
                                              spec.run.duration + 2.0);
  }
  Biofilter::InfluentFn influent = [gen, series](double t) {
    return gen ? gen->at(t) : series->at(t);
  };

  Biofilter plant(spec.plant, spec.kinetics);
  PlantState state = plant.init_plant();
  EffluentSensor sensor(spec.sensor);
  Controller controller(spec.classical, spec.mfc,
                        spec.mode == ControlMode::kClassicalMfc);

  const double dt = spec.run.dt;
  const long long total_steps = steps_in(spec.run.duration, dt, "duration");
  const long long per_sample = steps_in(spec.sensor.dt_sample, dt, "sample");
  const long long per_ctrl = steps_in(spec.mfc.dt_ctrl, dt, "ctrl");
  const long long per_day = steps_in(1.0, dt, "day");
  const long long k_bw = std::llround(spec.plant.t_bw / dt) % per_day;

  RunResult result;
  result.spec = spec;
  result.spec_hash = spec_hash(spec);
  result.rows.reserve(static_cast<std::size_t>(total_steps / per_sample) + 2);

  sensor.push(0.0, state.effluent_tank().bulk[kSNO2],
              state.effluent_tank().bulk[kSNO3]);

  Measurement meas;
  ControlOutput out;
  for (long long k = 0; k <= total_steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const InfluentState in = influent(t);

    const bool backwash_now = k > 0 && (k % per_day) == k_bw;
    if (backwash_now) plant.apply_backwash(state);

    if (k % per_sample == 0) meas = sensor.sample(t, in.Q);
    if (k % per_ctrl == 0) {
      out = controller.step(t, in.Q, in.C_NO3, meas.NO2_out, meas.flagged);
    }

    if (k % per_sample == 0) {
      LogRow row;
      row.t = t;
      row.Q = in.Q;
      row.NO3_in = in.C_NO3;
      row.NO2_in = in.C_NO2;
      row.NO2_out = state.effluent_tank().bulk[kSNO2];
      row.NO3_out = state.effluent_tank().bulk[kSNO3];
      row.u_ff = out.u_ff;
      row.u_corr = out.u_corr;
      row.u_total = out.u_total;
      row.meoh = out.u_total / 1.5;
      row.F_hat = out.F_hat;
      row.mfc_active = out.mfc_active;
      row.backwash = backwash_now;
      result.rows.push_back(row);
    }

    if (k < total_steps) {
      plant.step(state, influent, out.u_total, dt);
      sensor.push(state.t, state.effluent_tank().bulk[kSNO2],
                  state.effluent_tank().bulk[kSNO3]);
    }
  }

  result.sludge = state.sludge;
  result.totals = state.totals;
  result.clamp_cod_g = state.clamp_cod_g;
  result.clamp_n_g = state.clamp_n_g;
  result.final_state = std::move(state);
  return result;
}

std::vector<double> extract(const std::vector<LogRow>& rows,
                            double LogRow::*field, const Window& w) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const LogRow& r : rows) {
    if (r.t >= w.t_start - 1e-12 && r.t <= w.t_end + 1e-12) {
      v.push_back(r.*field);
    }
  }
  return v;
}

SummaryStats summarize_rows(const std::vector<LogRow>& rows,
                            double LogRow::*field, const Window& w) {
  const std::vector<double> v = extract(rows, field, w);
  if (v.empty()) throw ConfigError("summarize: evaluation window is empty");
  return summarize(v);
}

SummaryStats summarize_nox(const std::vector<LogRow>& rows, const Window& w) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const LogRow& r : rows) {
    if (r.t >= w.t_start - 1e-12 && r.t <= w.t_end + 1e-12) {
      v.push_back(r.NO2_out + r.NO3_out);
    }
  }
  if (v.empty()) throw ConfigError("summarize: evaluation window is empty");
  return summarize(v);
}

namespace {

StrategySummary strategy_summary(const RunResult& r, const std::string& label,
                                 const Window& w) {
  StrategySummary s;
  s.label = label;
  s.spec_hash = r.spec_hash;
  s.no2 = summarize_rows(r.rows, &LogRow::NO2_out, w);
  s.no3 = summarize_rows(r.rows, &LogRow::NO3_out, w);
  s.nox = summarize_nox(r.rows, w);
  s.meoh = summarize_rows(r.rows, &LogRow::meoh, w);
  s.u_total = summarize_rows(r.rows, &LogRow::u_total, w);
  return s;
}

}  // namespace

ComparisonReport compare(const RunResult& a, const RunResult& b,
                         const std::string& label_a,
                         const std::string& label_b) {
  const auto& ra = a.spec.run;
  const auto& rb = b.spec.run;
  if (ra.warmup != rb.warmup || ra.duration != rb.duration ||
      a.spec.sensor.dt_sample != b.spec.sensor.dt_sample) {
    throw ConfigError("compare: evaluation windows differ");
  }
  const auto& ia = a.spec.influent;
  const auto& ib = b.spec.influent;
  if (ia.use_csv != ib.use_csv ||
      (ia.use_csv ? ia.csv_path != ib.csv_path
                  : ia.profile.seed != ib.profile.seed)) {
    throw ConfigError("compare: influent sources differ; statistics must be "
                      "computed against the same disturbance realization");
  }

  const Window w = evaluation_window(a.spec);
  ComparisonReport rep;
  rep.window = w;
  rep.a = strategy_summary(a, label_a, w);
  rep.b = strategy_summary(b, label_b, w);
  rep.no2_range_ratio = rep.a.no2.range() > 0.0
                            ? rep.b.no2.range() / rep.a.no2.range()
                            : std::numeric_limits<double>::infinity();
  rep.no2_mean_offset_a = rep.a.no2.mean - a.spec.mfc.y_set;
  rep.no2_mean_offset_b = rep.b.no2.mean - b.spec.mfc.y_set;
  rep.methanol_delta_pct =
      rep.a.meoh.mean != 0.0
          ? 100.0 * (rep.b.meoh.mean - rep.a.meoh.mean) / rep.a.meoh.mean
          : std::numeric_limits<double>::infinity();
  return rep;
}

CalibrationResult calibrate_classical(const ScenarioSpec& base, double target,
                                      double k_lo, double k_hi, double tol,
                                      int max_iter) {
  if (!(k_lo > 0.0) || !(k_hi > k_lo)) {
    throw ConfigError("calibrate: need 0 < k_lo < k_hi");
  }
  if (!(tol > 0.0)) throw ConfigError("calibrate: tol must be > 0");

  ScenarioSpec spec = base;
  spec.mode = ControlMode::kClassical;
  spec.run.output_csv.clear();
  spec.run.output_summary.clear();
  const Window w = evaluation_window(spec);

  CalibrationResult res;
  auto eval = [&](double k) {
    spec.classical.K = k;
    const RunResult r = run_scenario(spec);
    const double mean = summarize_rows(r.rows, &LogRow::NO2_out, w).mean;
    res.evals.emplace_back(k, mean);
    ++res.iterations;
    return mean;
  };

  double f_lo = eval(k_lo);
  if (std::abs(f_lo - target) <= tol) {
    res.K_star = k_lo;
    res.achieved_mean = f_lo;
    return res;
  }
  double f_hi = eval(k_hi);
  if (std::abs(f_hi - target) <= tol) {
    res.K_star = k_hi;
    res.achieved_mean = f_hi;
    return res;
  }
  // The mean NO2 response over K is single-peaked (underdosing leaves the
  // nitrate step starved, overdosing polishes nitrite away); calibration
  // targets the descending branch where more carbon means less nitrite.
  if (!(f_lo > target && target > f_hi)) {
    throw ConfigError(
        "calibrate: target not bracketed on the descending branch; widen "
        "[k_lo, k_hi]");
  }

  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (k_lo + k_hi);
    const double f_mid = eval(mid);
    if (std::abs(f_mid - target) <= tol) {
      res.K_star = mid;
      res.achieved_mean = f_mid;
      return res;
    }
    if (f_mid > target) {
      k_lo = mid;
    } else {
      k_hi = mid;
    }
  }
  throw ConfigError("calibrate: did not converge within max_iter runs");
}

std::string timeseries_csv(const std::vector<LogRow>& rows) {
  std::string out(kTimeseriesCsvHeader);
  out += '\n';
  for (const LogRow& r : rows) format_row(out, r);
  return out;
}

std::string combined_csv(const RunResult& a, const RunResult& b,
                         const std::string& label_a,
                         const std::string& label_b) {
  std::string out(kTimeseriesCsvHeader);
  out += ",strategy\n";
  auto emit = [&out](const RunResult& r, const std::string& label) {
    for (const LogRow& row : r.rows) {
      std::string line;
      format_row(line, row);
      line.pop_back();  // newline inside format_row
      out += line;
      out += ',';
      out += label;
      out += '\n';
    }
  };
  emit(a, label_a);
  emit(b, label_b);
  return out;
}

std::string influent_csv(const ScenarioSpec& spec) {
  std::string out(kInfluentCsvHeader);
  out += '\n';
  std::shared_ptr<InfluentGenerator> gen;
  std::shared_ptr<CsvSeries> series;
  if (spec.influent.use_csv) {
    series =
        std::make_shared<CsvSeries>(load_timeseries(spec.influent.csv_path));
  } else {
    gen = std::make_shared<InfluentGenerator>(spec.influent.profile,
                                              spec.run.duration + 2.0);
  }
  const long long n =
      std::llround(spec.run.duration / spec.sensor.dt_sample);
  for (long long k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * spec.sensor.dt_sample;
    const InfluentState in = gen ? gen->at(t) : series->at(t);
    format_value(out, t);
    out += ',';
    format_value(out, in.Q);
    out += ',';
    format_value(out, in.C_NO3);
    out += ',';
    format_value(out, in.C_NO2);
    out += ',';
    format_value(out, in.C_SS);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << content;
  if (!f) throw ConfigError("write failed: " + path);
}

}  // namespace denitsim
