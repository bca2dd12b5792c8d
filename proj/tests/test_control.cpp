#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "denitsim/control.hpp"
#include "denitsim/errors.hpp"

using namespace denitsim;

namespace {

constexpr double kDtCtrl = 300.0 / 86400.0;  // 5 min
constexpr double kWindow = 0.04;             // ~1 h

// Fill a buffer with y(t) sampled on the control grid and constant u.
EstimatorBuffer sampled(double t_end, double dt, auto&& y_of_t, double u) {
  EstimatorBuffer buf;
  for (int k = 0;; ++k) {
    const double t = k * dt;
    if (t > t_end + 1e-12) break;
    buf.push(t, y_of_t(t), u);
  }
  return buf;
}

}  // namespace

TEST_SUITE_BEGIN("control");

TEST_CASE("classical dose follows the nitrate load") {
  ClassicalConfig cfg;  // K = 3, setpoint 2 gN/m3
  CHECK(classical_dose(45000.0, 15.0, cfg) ==
        doctest::Approx(1755.0).epsilon(1e-12));
  CHECK(classical_dose(45000.0, 2.0, cfg) == 0.0);
  CHECK(classical_dose(45000.0, 1.0, cfg) == 0.0);  // never negative
  cfg.K = 4.0;
  CHECK(classical_dose(30000.0, 7.0, cfg) ==
        doctest::Approx(4.0 * 30000.0 * 5.0 / 1000.0).epsilon(1e-12));
}

TEST_CASE("estimator is silent until the buffer spans a window") {
  EstimatorBuffer buf;
  CHECK(!estimate_F(buf, -0.01, kWindow, 0.0).has_value());
  buf.push(0.0, 1.0, 0.0);
  buf.push(kDtCtrl, 1.0, 0.0);
  CHECK(!estimate_F(buf, -0.01, kWindow, kDtCtrl).has_value());
}

TEST_CASE("constant y with zero input estimates F = 0") {
  const auto buf = sampled(2.0 * kWindow + kDtCtrl, kDtCtrl,
                           [](double) { return 0.8; }, 0.0);
  const auto f = estimate_F(buf, -0.01, kWindow, 2.0 * kWindow);
  REQUIRE(f.has_value());
  CHECK(std::abs(*f) <= 1e-9);
}

TEST_CASE("affine y recovers the slope exactly, window off the grid") {
  // t_now - T falls between samples; the clipped first interval must be
  // interpolated, not snapped.
  const double a = 3.1, b = 0.7;
  for (double t_now : {kWindow, 17.0 * kDtCtrl, 0.0875}) {
    const auto buf = sampled(t_now + kDtCtrl, kDtCtrl,
                             [&](double t) { return b + a * t; }, 0.0);
    const auto f = estimate_F(buf, -0.01, kWindow, t_now);
    REQUIRE(f.has_value());
    CHECK(*f == doctest::Approx(a).epsilon(1e-9));
  }
}

TEST_CASE("constant F with a step in u is recovered exactly") {
  // y' = F0 + alpha*u with u stepping mid-window: the u weighting must
  // cancel the input's contribution for any dosing history.
  const double F0 = 2.0, alpha = 0.5;
  EstimatorBuffer buf;
  double y = 1.0, t = 0.0;
  double u_prev = 0.0;
  buf.push(0.0, y, u_prev);
  for (int k = 1; k * kDtCtrl <= 3.0 * kWindow + 1e-12; ++k) {
    const double u = (k * kDtCtrl > 2.5 * kWindow) ? 4.0 : 1.0;
    y += (F0 + alpha * u) * kDtCtrl;  // exact: piecewise-linear trajectory
    t = k * kDtCtrl;
    buf.push(t, y, u);
  }
  const auto f = estimate_F(buf, alpha, kWindow, t);
  REQUIRE(f.has_value());
  CHECK(*f == doctest::Approx(F0).epsilon(1e-9));
}

TEST_CASE("simulated first-order plant: estimate converges to F within 1e-3") {
  const double F0 = 2.0, alpha = 0.5, u = 1.0;
  const auto buf = sampled(
      2.0 * kWindow + kDtCtrl, kDtCtrl,
      [&](double t) { return (F0 + alpha * u) * t; }, u);
  const auto f = estimate_F(buf, alpha, kWindow, 2.0 * kWindow);
  REQUIRE(f.has_value());
  CHECK(*f == doctest::Approx(F0).epsilon(1e-3));
}

TEST_CASE("ip correction arithmetic") {
  CHECK(ip_correction(0.0, 0.0, 0.0, -0.01, 2.0) == 0.0);
  CHECK(ip_correction(0.2, 0.1, 0.0, -0.01, 2.0) ==
        doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("the corrector is linear in the bracket: u*alpha is the bracket") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double F = v(rng), e = v(rng), ysp = v(rng);
    const double Kp = std::abs(v(rng)) + 0.1;
    double alpha = v(rng);
    if (std::abs(alpha) < 1e-3) alpha = 1e-3;
    const double u = ip_correction(F, e, ysp, alpha, Kp);
    CHECK(u * alpha == doctest::Approx(-(F - ysp + Kp * e)).epsilon(1e-12));
    // Doubling alpha halves the correction, leaving u*alpha invariant.
    CHECK(ip_correction(F, e, ysp, 2.0 * alpha, Kp) * 2.0 * alpha ==
          doctest::Approx(u * alpha).epsilon(1e-12));
  }
}

TEST_CASE("gating: below the setpoint the correction is off") {
  MfcConfig cfg;
  CHECK(combined_dose(100.0, 50.0, cfg.y_set - 0.01, cfg) == 100.0);
  CHECK(combined_dose(100.0, 50.0, cfg.y_set, cfg) == 100.0);
  CHECK(combined_dose(100.0, 50.0, cfg.y_set + 0.01, cfg) == 150.0);
  CHECK(combined_dose(100.0, std::nullopt, cfg.y_set + 1.0, cfg) == 100.0);
}

TEST_CASE("correction saturates and never subtracts") {
  MfcConfig cfg;
  cfg.u_corr_max = 500.0;
  const double y = cfg.y_set + 1.0;
  CHECK(combined_dose(100.0, 1e9, y, cfg) == 600.0);
  CHECK(combined_dose(100.0, -200.0, y, cfg) == 100.0);
}

TEST_CASE("controller: disabled mfc reproduces the classical dose bitwise") {
  const ClassicalConfig classical;
  const MfcConfig mfc;
  Controller with(classical, mfc, true);
  Controller without(classical, mfc, false);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> no3(5.0, 20.0);
  std::uniform_real_distribution<double> no2(0.0, mfc.y_set);  // gate closed
  for (int k = 0; k < 600; ++k) {
    const double t = k * mfc.dt_ctrl;
    const double cin = no3(rng), y = no2(rng);
    const ControlOutput a = with.step(t, 45000.0, cin, y);
    const ControlOutput b = without.step(t, 45000.0, cin, y);
    CHECK(a.u_total == b.u_total);
    CHECK(a.u_corr == 0.0);
    CHECK(!a.mfc_active);
  }
}

TEST_CASE("controller warms up on feedforward only, then engages") {
  const ClassicalConfig classical;
  MfcConfig mfc;
  Controller ctrl(classical, mfc, true);
  const double y = mfc.y_set + 0.1;  // pinned above the setpoint
  int first_active = -1;
  for (int k = 0; k <= 40; ++k) {
    const double t = k * mfc.dt_ctrl;
    const ControlOutput out = ctrl.step(t, 45000.0, 15.0, y);
    if (t < mfc.T - 1e-12) {
      CHECK(out.u_total == out.u_ff);
      CHECK(!out.ready);
    } else if (first_active < 0 && out.mfc_active) {
      first_active = k;
    }
    if (out.ready) {
      // Steady positive error: the correction must push carbon in.
      CHECK(out.u_corr > 0.0);
    }
  }
  CHECK(first_active >= 0);
  CHECK(first_active * mfc.dt_ctrl >= mfc.T - 1e-12);
}

TEST_CASE("controller holds its output on a flagged sensor") {
  const ClassicalConfig classical;
  const MfcConfig mfc;
  Controller ctrl(classical, mfc, true);
  const ControlOutput a = ctrl.step(0.0, 45000.0, 15.0, 0.9);
  const ControlOutput b =
      ctrl.step(mfc.dt_ctrl, 45000.0, 99.0, 99.0, /*sensor_flagged=*/true);
  CHECK(b.u_total == a.u_total);
  CHECK(b.u_ff == a.u_ff);
}

TEST_CASE("closed loop on a toy plant decays the error at K_p") {
  // Toy: y' = F(t) + alpha*u, integrated exactly over each control period
  // (F piecewise-constant on the grid, u held). With the estimator exact on
  // piecewise-linear trajectories, e' = -K_p e up to the discrete hold.
  MfcConfig mfc;
  mfc.alpha = -0.5;  // dosing pulls y down, as in the plant channel
  mfc.K_p = 24.0;
  mfc.T = kWindow;
  mfc.dt_ctrl = 1e-4;
  mfc.y_set = 0.8;
  mfc.u_corr_max = 1e9;  // saturation out of the way; sign gate stays

  auto F_true = [](double t) { return t < 0.5 ? 0.4 : 0.9; };

  EstimatorBuffer buf;
  double y = 2.0;  // start well above the setpoint
  double u_prev = 0.0;
  std::vector<std::pair<double, double>> err;
  for (int k = 0; k * mfc.dt_ctrl <= 1.0; ++k) {
    const double t = k * mfc.dt_ctrl;
    buf.push(t, y, u_prev);
    buf.prune_before(t - mfc.T - 2.0 * mfc.dt_ctrl);
    const auto F_hat = estimate_F(buf, mfc.alpha, mfc.T, t);
    double u = 0.0;
    if (F_hat.has_value() && y > mfc.y_set) {
      u = std::clamp(
          ip_correction(*F_hat, y - mfc.y_set, 0.0, mfc.alpha, mfc.K_p), 0.0,
          mfc.u_corr_max);
    }
    err.emplace_back(t, y - mfc.y_set);
    y += (F_true(t) + mfc.alpha * u) * mfc.dt_ctrl;  // exact integration
    u_prev = u;
  }

  // Fit the decay rate on a stretch where the estimator window is full and
  // the error is still well above rounding: ln e(t) should fall at K_p.
  auto rate_between = [&](double t0, double t1) {
    double e0 = 0.0, e1 = 0.0;
    for (const auto& [t, e] : err) {
      if (std::abs(t - t0) < 1e-9) e0 = e;
      if (std::abs(t - t1) < 1e-9) e1 = e;
    }
    REQUIRE(e0 > 0.0);
    REQUIRE(e1 > 0.0);
    return std::log(e0 / e1) / (t1 - t0);
  };
  const double r1 = rate_between(0.06, 0.16);   // after the first window fill
  const double r2 = rate_between(0.56, 0.66);   // after the F jump at 0.5
  CHECK(r1 == doctest::Approx(mfc.K_p).epsilon(0.01));
  CHECK(r2 == doctest::Approx(mfc.K_p).epsilon(0.01));
}

TEST_CASE("config validation rejects nonsense") {
  MfcConfig mfc;
  mfc.alpha = 0.0;
  CHECK_THROWS_AS(mfc.validate(), ConfigError);
  mfc = MfcConfig{};
  mfc.K_p = 0.0;
  CHECK_THROWS_AS(mfc.validate(), ConfigError);
  mfc = MfcConfig{};
  mfc.T = mfc.dt_ctrl / 2.0;
  CHECK_THROWS_AS(mfc.validate(), ConfigError);
  ClassicalConfig c;
  c.K = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("estimator buffer rejects non-increasing time") {
  EstimatorBuffer buf;
  buf.push(0.0, 1.0, 0.0);
  CHECK_THROWS_AS(buf.push(0.0, 1.0, 0.0), NumericalFault);
}

TEST_SUITE_END();
