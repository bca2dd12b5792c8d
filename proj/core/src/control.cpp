#include "denitsim/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "denitsim/errors.hpp"

namespace denitsim {

namespace {

constexpr double kTimeTol = 1e-9;  // d; grid times carry rounding from k*dt

// Exact integral of s*(T-s) on [a,b].
double int_su(double T, double a, double b) {
  auto A = [T](double s) { return 0.5 * T * s * s - s * s * s / 3.0; };
  return A(b) - A(a);
}

// Exact integral of (T-2s)*line(s) on [a,b] for a line through
// (s0,y0)-(s1,y1): the integrand is quadratic, two-point Gauss is exact.
double int_wy(double T, double a, double b, double s0, double y0, double s1,
              double y1) {
  const double m = 0.5 * (a + b);
  const double d = 0.5 * (b - a);
  const double node = d / std::sqrt(3.0);
  auto f = [&](double s) {
    const double y = y0 + (y1 - y0) * (s - s0) / (s1 - s0);
    return (T - 2.0 * s) * y;
  };
  return d * (f(m - node) + f(m + node));
}

}  // namespace

void ClassicalConfig::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(K > 0.0, "K must be > 0");
  require(C_NO3_set >= 0.0, "C_NO3_set must be >= 0");
  if (bad.tellp() > 0) throw ConfigError("control.classical: " + bad.str());
}

void MfcConfig::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(std::isfinite(alpha) && alpha != 0.0, "alpha must be nonzero");
  require(K_p > 0.0, "K_p must be > 0");
  require(T > 0.0, "T must be > 0");
  require(dt_ctrl > 0.0, "dt_ctrl must be > 0");
  require(T >= dt_ctrl - kTimeTol, "T must cover at least one dt_ctrl");
  require(y_set >= 0.0, "y_set must be >= 0");
  require(u_corr_max >= 0.0, "u_corr_max must be >= 0");
  if (bad.tellp() > 0) throw ConfigError("control.mfc: " + bad.str());
}

double classical_dose(double Q_m3d, double c_no3_in,
                      const ClassicalConfig& cfg) {
  return cfg.K * Q_m3d * std::max(0.0, c_no3_in - cfg.C_NO3_set) / 1000.0;
}

void EstimatorBuffer::push(double t, double y, double u) {
  if (!buf_.empty() && !(t > buf_.back().t)) {
    throw NumericalFault("estimator buffer: time must be strictly increasing");
  }
  buf_.push_back({t, y, u});
}

bool EstimatorBuffer::spans(double T, double t_now) const {
  return !buf_.empty() && buf_.front().t <= t_now - T + kTimeTol &&
         buf_.back().t >= t_now - kTimeTol;
}

void EstimatorBuffer::prune_before(double t_cut) {
  while (buf_.size() > 2 && buf_[1].t <= t_cut) buf_.pop_front();
}

std::optional<double> estimate_F(const EstimatorBuffer& buf, double alpha,
                                 double T, double t_now) {
  if (!buf.spans(T, t_now)) return std::nullopt;
  const auto& s = buf.samples();
  const double t0 = t_now - T;  // window start; sigma = t - t0

  double I_y = 0.0;
  double I_u = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double ta = s[i - 1].t;
    const double tb = s[i].t;
    if (tb <= t0) continue;
    if (ta >= t_now) break;
    const double a = std::max(0.0, ta - t0);
    const double b = std::min(T, tb - t0);
    if (b <= a) continue;
    I_y += int_wy(T, a, b, ta - t0, s[i - 1].y, tb - t0, s[i].y);
    // u is held over (t_{i-1}, t_i]; s[i].u is the value of that hold.
    I_u += s[i].u * int_su(T, a, b);
  }
  return -(6.0 / (T * T * T)) * (I_y + alpha * I_u);
}

double ip_correction(double F_hat, double e, double ysp_dot, double alpha,
                     double K_p) {
  return -(F_hat - ysp_dot + K_p * e) / alpha;
}

double combined_dose(double u_ff, std::optional<double> u_mfc, double y,
                     const MfcConfig& cfg) {
  if (!u_mfc.has_value() || !(y > cfg.y_set)) return u_ff;
  return u_ff + std::clamp(*u_mfc, 0.0, cfg.u_corr_max);
}

Controller::Controller(const ClassicalConfig& classical, const MfcConfig& mfc,
                       bool mfc_enabled)
    : classical_(classical), mfc_(mfc), mfc_enabled_(mfc_enabled) {
  classical_.validate();
  mfc_.validate();
}

ControlOutput Controller::step(double t, double Q, double c_no3_in,
                               double no2_measured, bool sensor_flagged) {
  if (sensor_flagged) return last_;  // hold the previous dose

  ControlOutput out;
  out.u_ff = classical_dose(Q, c_no3_in, classical_);
  if (!mfc_enabled_) {
    out.u_total = out.u_ff;
    last_ = out;
    return out;
  }

  // The buffer records the correction that was held over the interval
  // ending now, i.e. the previous period's output.
  buf_.push(t, no2_measured, last_.u_corr);
  buf_.prune_before(t - mfc_.T - 2.0 * mfc_.dt_ctrl);

  const std::optional<double> F_hat =
      estimate_F(buf_, mfc_.alpha, mfc_.T, t);
  out.ready = F_hat.has_value();
  out.F_hat = F_hat.value_or(0.0);

  std::optional<double> u_mfc;
  if (F_hat.has_value()) {
    u_mfc = ip_correction(*F_hat, no2_measured - mfc_.y_set, 0.0, mfc_.alpha,
                          mfc_.K_p);
  }
  out.mfc_active = F_hat.has_value() && no2_measured > mfc_.y_set;
  out.u_total = combined_dose(out.u_ff, u_mfc, no2_measured, mfc_);
  out.u_corr = out.u_total - out.u_ff;
  last_ = out;
  return out;
}

}  // namespace denitsim
