#pragma once

#include <deque>
#include <optional>

namespace denitsim {

/// Feedforward carbon dosing from the measured influent nitrate load.
struct ClassicalConfig {
  double K = 3.0;          // gCOD dosed per gN of nitrate above the setpoint
  double C_NO3_set = 2.0;  // gN/m3, nitrate allowed to survive

  void validate() const;
};

/// Additive corrector built on the first-order ultra-local model
/// y' = F + alpha * u.
struct MfcConfig {
  double alpha = -0.01;   // (gN/m3/d) per kgCOD/d; negative: dosing lowers y
  double K_p = 48.0;      // 1/d, closed-loop error decay rate
  double T = 0.004;       // d, estimation window (~6 min)
  double y_set = 0.8;     // gN/m3, effluent nitrite setpoint
  double u_corr_max = 550.0;           // kgCOD/d, correction saturation
  double dt_ctrl = 120.0 / 86400.0;    // d, controller period

  void validate() const;
};

/// u_ff = K * Q * max(0, C_NO3_in - C_NO3_set) / 1000, in kgCOD/d.
double classical_dose(double Q_m3d, double c_no3_in,
                      const ClassicalConfig& cfg);

/// Sliding history of (t, y, u) pairs pushed once per controller period; u
/// is the correction that was applied over the interval ending at t.
class EstimatorBuffer {
 public:
  struct Sample {
    double t, y, u;
  };

  /// t must be strictly increasing.
  void push(double t, double y, double u);
  bool spans(double T, double t_now) const;
  const std::deque<Sample>& samples() const { return buf_; }
  void prune_before(double t_cut);

 private:
  std::deque<Sample> buf_;
};

/// Windowed algebraic estimate of F in y' = F + alpha*u:
///   F_hat = -(6/T^3) * integral_0^T [ (T-2s)*y(t-T+s)
///                                     + alpha*s*(T-s)*u(t-T+s) ] ds.
/// The integral annihilates constants in y, recovers the slope of affine y
/// exactly, and cancels the alpha*u term exactly for any dosing history
/// (integration by parts), so constant F is recovered exactly. Evaluated
/// with y piecewise-linear between samples and u piecewise-constant (the
/// value attached to the interval that ends at each sample); the polynomial
/// weights are integrated exactly on each interval, so no quadrature error
/// is added on top of the data model. Returns nullopt until the buffer
/// spans a full window.
std::optional<double> estimate_F(const EstimatorBuffer& buf, double alpha,
                                 double T, double t_now);

/// Corrector from the ultra-local model: u = -(F_hat - ysp_dot + K_p*e)/alpha
/// with e = y - y_set. Unsaturated, sign included.
double ip_correction(double F_hat, double e, double ysp_dot, double alpha,
                     double K_p);

/// Feedforward plus gated, saturated correction. The correction only adds
/// carbon: it is active when an estimate exists and the measured y exceeds
/// y_set, and is clamped to [0, u_corr_max].
double combined_dose(double u_ff, std::optional<double> u_mfc, double y,
                     const MfcConfig& cfg);

struct ControlOutput {
  double u_total = 0.0;  // kgCOD/d
  double u_ff = 0.0;
  double u_corr = 0.0;
  double F_hat = 0.0;      // 0 until the estimator is ready
  bool mfc_active = false; // correction gate open this period
  bool ready = false;      // estimator window filled
};

/// One controller instance per run: the classical feedforward plus, when
/// enabled, the additive model-free correction on measured effluent NO2.
class Controller {
 public:
  Controller(const ClassicalConfig& classical, const MfcConfig& mfc,
             bool mfc_enabled);

  /// Call on the dt_ctrl grid with the current influent measurements and
  /// the held effluent NO2 sample. A flagged sensor holds the previous
  /// output unchanged.
  ControlOutput step(double t, double Q, double c_no3_in, double no2_measured,
                     bool sensor_flagged = false);

  const ControlOutput& last() const { return last_; }
  bool mfc_enabled() const { return mfc_enabled_; }

 private:
  ClassicalConfig classical_;
  MfcConfig mfc_;
  bool mfc_enabled_;
  EstimatorBuffer buf_;
  ControlOutput last_{};
};

}  // namespace denitsim
