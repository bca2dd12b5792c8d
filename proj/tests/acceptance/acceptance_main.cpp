// End-to-end acceptance checks. Each check prints exactly one line:
//   A<n> PASS|FAIL <measured detail> (tol <threshold>) [<seconds> s]
// The process exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "denitsim/control.hpp"
#include "denitsim/scenario.hpp"
#include "denitsim/stats.hpp"

using namespace denitsim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string tol;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- A1 -----
// The windowed estimator must return the exact slope of an affine signal.
Outcome a1_estimator_exactness() {
  const double T = 1.0 / 24.0;        // 1 h
  const double dt = 300.0 / 86400.0;  // 5 min
  double worst = 0.0;
  for (double slope : {-3.0, -0.37, 0.0, 0.42, 5.0, 1000.0}) {
    for (double intercept : {0.0, 0.8, -2.0, 17.0}) {
      EstimatorBuffer buf;
      double t_now = 0.0;
      for (int k = 0; k * dt <= 2.0 * T + 1e-12; ++k) {
        t_now = k * dt;
        buf.push(t_now, intercept + slope * t_now, 0.0);
      }
      const auto f = estimate_F(buf, -0.01, T, t_now);
      if (!f.has_value()) {
        return {false, "estimator not ready on a full window", "1e-06"};
      }
      worst = std::max(worst,
                       std::abs(*f - slope) / std::max(1.0, std::abs(slope)));
    }
  }
  return {worst <= 1e-6, "max rel slope error " + fmt("%.3g", worst), "1e-06"};
}

// ---------------------------------------------------------------- A2 -----
// Closed loop on the toy plant y' = F0(t) + alpha*u with exact sampling:
// the tracking error must decay at a measured rate within 10% of K_p.
Outcome a2_closed_loop_decay() {
  const double alpha = -0.01, K_p = 24.0, y_set = 0.8;
  const double T = 1.0 / 24.0, dt = 300.0 / 86400.0;
  auto F0 = [](double t) { return t < 0.5 ? 0.4 : 0.9; };

  EstimatorBuffer buf;
  std::vector<std::pair<double, double>> trace;  // (t, e)
  double y = 2.0, u_prev = 0.0;
  for (int k = 0; k * dt <= 1.0 + 1e-12; ++k) {
    const double t = k * dt;
    buf.push(t, y, u_prev);
    buf.prune_before(t - T - 2.0 * dt);
    const auto F_hat = estimate_F(buf, alpha, T, t);
    const double u =
        F_hat ? ip_correction(*F_hat, y - y_set, 0.0, alpha, K_p) : 0.0;
    trace.emplace_back(t, y - y_set);
    y += (F0(t) + alpha * u) * dt;  // exact for piecewise-constant inputs
    u_prev = u;
  }

  // Least-squares slope of ln e(t) over a window of positive errors.
  auto fitted_rate = [&](double t0, double t1) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [t, e] : trace) {
      if (t < t0 || t > t1 || e <= 1e-12) continue;
      const double le = std::log(e);
      sx += t;
      sy += le;
      sxx += t * t;
      sxy += t * le;
      ++n;
    }
    if (n < 4) return 0.0;
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  const double r1 = fitted_rate(0.10, 0.30);   // settled, before the jump
  const double r2 = fitted_rate(0.62, 0.85);   // settled after the jump
  const double worst =
      std::max(std::abs(r1 - K_p), std::abs(r2 - K_p)) / K_p;
  return {worst <= 0.10 && r1 > 0.0 && r2 > 0.0,
          "decay rates " + fmt("%.2f", r1) + "/d and " + fmt("%.2f", r2) +
              "/d vs K_p 24/d, worst rel err " + fmt("%.3g", worst),
          "0.1"};
}

// ---------------------------------------------------------------- A3 -----
// Two-day run: boundary-flow mass balance closes to 1e-6 relative, and
// halving the integrator step moves the window-mean NO2 by <= 0.5%.
Outcome a3_conservation() {
  ScenarioSpec spec;
  spec.run.duration = 2.0;
  spec.run.warmup = 1.0;

  const RunResult r = run_scenario(spec);
  const Biofilter plant(spec.plant, spec.kinetics);
  const PlantState s0 = plant.init_plant();

  auto stored_n = [&](const PlantState& s) {
    const double V = spec.plant.liquid_volume_per_tank();
    const double A = spec.plant.film_area_per_tank();
    double n = 0.0;
    for (const TankState& tank : s.tanks) {
      n += V * (tank.bulk[kSNO3] + tank.bulk[kSNO2] + tank.bulk[kSN2]);
      for (const FilmLayer& l : tank.film) {
        n += A * (l.w[kSNO3] + l.w[kSNO2] + l.w[kSN2]);
      }
    }
    return n;
  };
  auto stored_cod = [&](const PlantState& s) {
    const double V = spec.plant.liquid_volume_per_tank();
    const double A = spec.plant.film_area_per_tank();
    double m = 0.0;
    for (const TankState& tank : s.tanks) {
      m += V * (tank.bulk[kSS] + tank.bulk[kXH] + tank.bulk[kXI]);
      for (const FilmLayer& l : tank.film) m += A * (l.a_XH + l.a_XI + l.w[kSS]);
    }
    return m;
  };

  const double n_resid =
      std::abs(stored_n(r.final_state) + r.sludge.n_g - stored_n(s0) -
               (r.totals.n_in_g - r.totals.n_out_g) - r.clamp_n_g) /
      r.totals.n_in_g;
  const double cod_resid =
      std::abs(stored_cod(r.final_state) + r.sludge.cod_g - stored_cod(s0) -
               (r.totals.cod_in_g + r.totals.cod_dosed_g -
                r.totals.cod_out_g - r.totals.cod_reduced_g) -
               r.clamp_cod_g) /
      (r.totals.cod_in_g + r.totals.cod_dosed_g);

  ScenarioSpec fine = spec;
  fine.run.dt = spec.run.dt / 2.0;
  const RunResult rf = run_scenario(fine);
  const Window w = evaluation_window(spec);
  const double m_coarse = summarize_rows(r.rows, &LogRow::NO2_out, w).mean;
  const double m_fine = summarize_rows(rf.rows, &LogRow::NO2_out, w).mean;
  const double dmean =
      std::abs(m_coarse - m_fine) / std::max(1e-9, std::abs(m_fine));

  const bool pass = n_resid <= 1e-6 && cod_resid <= 1e-6 && dmean <= 0.005;
  return {pass,
          "N resid " + fmt("%.3g", n_resid) + ", COD resid " +
              fmt("%.3g", cod_resid) + ", dt-halving dmean NO2 " +
              fmt("%.3g", 100.0 * dmean) + "%",
          "1e-06 / 0.5%"};
}

// ------------------------------------------------------------- A4-A7 -----
struct HeadlineRuns {
  CalibrationResult cal;
  RunResult classical;
  RunResult mfc;
  double runtime_s = 0.0;
  std::string mfc_csv;
};

HeadlineRuns run_headline() {
  HeadlineRuns h;
  ScenarioSpec base;  // the 10-day default scenario, seed 42
  h.cal = calibrate_classical(base, 0.8, 3.0, 8.0, 0.02);

  ScenarioSpec classical = base;
  classical.mode = ControlMode::kClassical;
  classical.classical.K = h.cal.K_star;

  ScenarioSpec mfc = base;
  mfc.mode = ControlMode::kClassicalMfc;

  const auto t0 = Clock::now();
  h.classical = run_scenario(classical);
  h.mfc = run_scenario(mfc);
  h.runtime_s = seconds_since(t0);
  h.mfc_csv = timeseries_csv(h.mfc.rows);
  return h;
}

Outcome a4_headline(const HeadlineRuns& h) {
  const Window w = evaluation_window(h.mfc.spec);
  const SummaryStats no2_mfc = summarize_rows(h.mfc.rows, &LogRow::NO2_out, w);
  const SummaryStats no2_cls =
      summarize_rows(h.classical.rows, &LogRow::NO2_out, w);
  const SummaryStats meoh_mfc = summarize_rows(h.mfc.rows, &LogRow::meoh, w);
  const SummaryStats meoh_cls =
      summarize_rows(h.classical.rows, &LogRow::meoh, w);

  const bool mean_ok = no2_mfc.mean >= 0.75 && no2_mfc.mean <= 0.85;
  const double range_ratio = no2_mfc.range() / no2_cls.range();
  const bool range_ok = range_ratio <= 0.5;
  const double meoh_delta =
      std::abs(meoh_mfc.mean - meoh_cls.mean) / meoh_cls.mean;
  const bool meoh_ok = meoh_delta <= 0.05;
  const bool time_ok = h.runtime_s < 120.0;

  return {mean_ok && range_ok && meoh_ok && time_ok,
          "K* " + fmt("%.3f", h.cal.K_star) + ", corrected mean NO2 " +
              fmt("%.3f", no2_mfc.mean) + ", range ratio " +
              fmt("%.3f", range_ratio) + " (" + fmt("%.3f", no2_mfc.range()) +
              "/" + fmt("%.3f", no2_cls.range()) + "), methanol delta " +
              fmt("%.2f", 100.0 * meoh_delta) + "%, runs took " +
              fmt("%.1f", h.runtime_s) + " s",
          "mean in [0.75,0.85], ratio <= 0.5, delta <= 5%, < 120 s"};
}

Outcome a5_backwash_recovery(const HeadlineRuns& h) {
  const auto& rows = h.mfc.rows;
  const double y_set = h.mfc.spec.mfc.y_set;
  const double band = 0.1;
  const double limit = 4.0 / 24.0;

  double worst = 0.0;
  int events = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].backwash) continue;
    const double t_w = rows[i].t;
    if (t_w < h.mfc.spec.run.warmup || t_w + limit > h.mfc.spec.run.duration) {
      continue;  // no room to observe recovery after the final wash
    }
    ++events;
    // First return that holds for three consecutive samples (15 min).
    double t_rec = -1.0;
    int in_band = 0;
    for (std::size_t k = i + 1;
         k < rows.size() && rows[k].t <= t_w + 1.0; ++k) {
      if (std::abs(rows[k].NO2_out - y_set) <= band) {
        if (++in_band == 3) {
          t_rec = rows[k - 2].t;
          break;
        }
      } else {
        in_band = 0;
      }
    }
    if (t_rec < 0.0) return {false, "no recovery after the wash at t = " +
                                         fmt("%.0f", t_w) + " d",
                             "4 h"};
    worst = std::max(worst, t_rec - t_w);
  }
  if (events == 0) return {false, "no backwash events in the window", "4 h"};
  return {worst <= limit,
          std::to_string(events) + " washes, slowest recovery " +
              fmt("%.2f", worst * 24.0) + " h",
          "4 h"};
}

Outcome a6_cross_seed(const HeadlineRuns& h) {
  ScenarioSpec replay = h.classical.spec;   // carries K*
  replay.influent.profile.seed += 100;      // a different realization
  const RunResult r = run_scenario(replay);
  const Window w = evaluation_window(replay);
  const double mean = summarize_rows(r.rows, &LogRow::NO2_out, w).mean;
  const double dev = std::abs(mean - 0.8);
  return {dev >= 3.0 * 0.02,
          "replayed K* " + fmt("%.3f", h.cal.K_star) + " on a new seed: mean "
              "NO2 " + fmt("%.3f", mean) + ", |dev| " + fmt("%.3f", dev),
          ">= 0.06"};
}

Outcome a7_determinism(const HeadlineRuns& h) {
  const RunResult again = run_scenario(h.mfc.spec);
  const bool same = timeseries_csv(again.rows) == h.mfc_csv;
  return {same,
          same ? "10-day rerun is byte-identical (" +
                     fmt("%.0f", double(h.mfc_csv.size())) + " bytes)"
               : "rerun CSV differs",
          "exact"};
}

// ---------------------------------------------------------------- A8 -----
Outcome a8_quantile_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 400);
  std::uniform_real_distribution<double> value(-50.0, 50.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  auto oracle_quantile = [](std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double hpos = (static_cast<double>(v.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(hpos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (hpos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };

  double worst = 0.0;
  for (int series = 0; series < 1000; ++series) {
    const int n = len(rng);
    const bool quantized = coin(rng) < 0.3;  // force ties in 30% of series
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) {
      x = value(rng);
      if (quantized) x = std::round(x * 10.0) / 10.0;
    }
    const SummaryStats s = summarize(v);

    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double stddev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;

    auto err = [&worst](double got, double want) {
      worst = std::max(worst,
                       std::abs(got - want) / std::max(1.0, std::abs(want)));
    };
    err(s.mean, mean);
    err(s.stddev, stddev);
    err(s.min, *std::min_element(v.begin(), v.end()));
    err(s.max, *std::max_element(v.begin(), v.end()));
    err(s.median, oracle_quantile(v, 0.5));
    err(s.q25, oracle_quantile(v, 0.25));
    err(s.q75, oracle_quantile(v, 0.75));
    err(s.d10, oracle_quantile(v, 0.1));
    err(s.d90, oracle_quantile(v, 0.9));
    if (s.n != static_cast<std::size_t>(n)) {
      return {false, "count mismatch", "1e-12"};
    }
  }
  return {worst <= 1e-12,
          "1000 series, max rel deviation " + fmt("%.3g", worst), "1e-12"};
}

int report(const char* name, const Outcome& o, double secs) {
  std::printf("%s %s  %s (tol %s) [%.2f s]\n", name, o.pass ? "PASS" : "FAIL",
              o.detail.c_str(), o.tol.c_str(), secs);
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

}  // namespace

int main() {
  int failures = 0;
  {
    const auto t0 = Clock::now();
    const Outcome o = a1_estimator_exactness();
    failures += report("A1", o, seconds_since(t0));
  }
  {
    const auto t0 = Clock::now();
    const Outcome o = a2_closed_loop_decay();
    failures += report("A2", o, seconds_since(t0));
  }
  {
    const auto t0 = Clock::now();
    const Outcome o = a3_conservation();
    failures += report("A3", o, seconds_since(t0));
  }
  {
    const auto t0 = Clock::now();
    HeadlineRuns h = run_headline();
    failures += report("A4", a4_headline(h), seconds_since(t0));
    const auto t5 = Clock::now();
    failures += report("A5", a5_backwash_recovery(h), seconds_since(t5));
    const auto t6 = Clock::now();
    failures += report("A6", a6_cross_seed(h), seconds_since(t6));
    const auto t7 = Clock::now();
    failures += report("A7", a7_determinism(h), seconds_since(t7));
  }
  {
    const auto t0 = Clock::now();
    const Outcome o = a8_quantile_oracle();
    failures += report("A8", o, seconds_since(t0));
  }
  if (failures > 0) {
    std::printf("%d acceptance check(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance checks passed\n");
  return 0;
}
