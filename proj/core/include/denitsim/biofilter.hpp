#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <vector>

#include "denitsim/components.hpp"
#include "denitsim/influent.hpp"
#include "denitsim/kinetics.hpp"
#include "denitsim/rk4.hpp"

namespace denitsim {

/// Initial biofilm put on the media before the run.
struct Inoculum {
  double thickness = 3e-3;     // m, must be >= BiofilterConfig::L_min
  double X_H_fraction = 0.6;   // rest is inert COD
};

/// Geometry, transport and sloughing parameters of the up-flow biofilter,
/// modelled as n_tanks equal CSTRs in series with a layered biofilm on the
/// media of each tank.
struct BiofilterConfig {
  int n_tanks = 6;
  double V_total = 900.0;    // m3 empty-bed volume (~29 min empty-bed contact)
  double porosity = 0.38;    // liquid fraction of the bed
  double a_spec = 1500.0;    // m2 biofilm area per m3 empty bed
  double h_bed = 4.0;        // m, flow path length (sets filtration velocity)
  int n_layers = 3;          // biofilm discretization
  double rho_f = 2500.0;     // gCOD/m3, dry density of the film matrix
  std::array<double, kSolubleCount> D_eff = {1.5e-4, 1.5e-4, 1.5e-4,
                                             1.5e-4};  // m2/d in the film
  double k_L = 0.5;          // m/d, external mass-transfer coefficient
  double lambda_f = 1.0;     // 1/m, deep-bed filtration (attachment) coeff
  double k_det = 100.0;      // 1/(d m), detachment rate per film thickness
  // Thickness floor kept through backwash. Also the resolution guard for the
  // fixed layer grid: the per-layer gap L/n_layers must stay coarse enough
  // that film diffusion (~3*D_eff/gap^2) and surface exchange (~k_L/gap)
  // remain integrable at the run step, so the floor cannot be made arbitrarily
  // small without also shrinking run.dt.
  double L_min = 1.5e-3;     // m
  double f_bw = 0.3;         // fraction of film thickness removed per wash
  double t_bw = 0.0;         // d, time of day the daily backwash fires
  Inoculum inoculum;

  void validate() const;

  double tank_volume() const { return V_total / n_tanks; }          // m3 bed
  double liquid_volume_per_tank() const {                           // m3
    return tank_volume() * porosity;
  }
  double film_area_per_tank() const { return a_spec * tank_volume(); }  // m2
  double filtration_velocity(double Q) const {                      // m/d
    return Q * h_bed / V_total;
  }
};

/// One biofilm layer, stored as areal masses so that transport and
/// re-layering are exactly conservative. Layer thickness is derived:
/// L = (a_XH + a_XI) / rho_f, which keeps X_H + X_I = rho_f identically.
struct FilmLayer {
  double a_XH = 0.0;                        // gCOD/m2
  double a_XI = 0.0;                        // gCOD/m2
  std::array<double, kSolubleCount> w{};    // g/m2 dissolved areal mass

  double areal_mass() const { return a_XH + a_XI; }
  double thickness(double rho_f) const { return areal_mass() / rho_f; }
};

struct TankState {
  Components bulk{};            // g/m3 in the interstitial liquid
  std::vector<FilmLayer> film;  // index 0 = substratum, last = surface

  double film_thickness(double rho_f) const;
};

/// Film mass removed by backwashing, credited when a wash fires.
struct MassLedger {
  double cod_g = 0.0;
  double n_g = 0.0;
};

/// Boundary-flow integrals carried as extra integrator states, so the mass
/// balance closes to integrator precision rather than sampling precision.
struct FlowTotals {
  double n_in_g = 0.0;         // influent NOx-N
  double n_out_g = 0.0;        // effluent NO3+NO2+N2-N
  double cod_in_g = 0.0;       // influent soluble COD (without dosing)
  double cod_out_g = 0.0;      // effluent soluble + particulate COD
  double cod_dosed_g = 0.0;    // external carbon
  double cod_reduced_g = 0.0;  // COD oxidized against NOx (electron sink)
};

struct PlantState {
  std::vector<TankState> tanks;
  double t = 0.0;  // d
  MassLedger sludge;
  FlowTotals totals;
  double clamp_cod_g = 0.0;  // cumulative positivity-clamp magnitude
  double clamp_n_g = 0.0;

  const TankState& effluent_tank() const { return tanks.back(); }
};

/// Converts a dose rate into the concentration increment it adds to the
/// influent of tank 1. Throws NumericalFault when Q <= 0.
double dose_to_concentration(double u_kgCOD_d, double Q_m3d);  // gCOD/m3

/// The plant model. Owns configuration and kinetics; all state lives in
/// PlantState so runs are replayable and copyable.
class Biofilter {
 public:
  using InfluentFn = std::function<InfluentState(double)>;

  Biofilter(const BiofilterConfig& cfg, const KineticParams& kin);

  const BiofilterConfig& config() const { return cfg_; }
  const KineticParams& kinetics() const { return kin_; }

  PlantState init_plant() const;

  /// Time derivative of the full plant state (bulk, film, flow totals) at
  /// influent `in` with dose rate u (kgCOD/d). Exposed for direct
  /// verification; step() is the integration entry point.
  void derivatives(const PlantState& s, const InfluentState& in,
                   double u_kgCOD_d, PlantState& dsdt) const;

  /// Advances one fixed RK4 step of length dt: integrate, clamp negatives
  /// (logged), re-layer films to equal thickness, advance time, and check
  /// for numerical faults (NaN/Inf or |state| > 1e12).
  void step(PlantState& s, const InfluentFn& influent, double u_kgCOD_d,
            double dt) const;

  /// Instantaneous backwash: removes f_bw of each tank's film thickness
  /// from the surface inward (never below L_min), credits the sludge
  /// ledger, re-layers. Bulk is untouched.
  void apply_backwash(PlantState& s) const;

 private:
  std::size_t state_size() const;
  void flatten(const PlantState& s, std::vector<double>& y) const;
  void unflatten(const std::vector<double>& y, PlantState& s) const;
  void rhs(double t, const std::vector<double>& y, const InfluentFn& influent,
           double u_kgCOD_d, std::vector<double>& dydt) const;
  void clamp_negatives(PlantState& s) const;
  void relayer(TankState& tank) const;
  void fault_check(const PlantState& s) const;

  BiofilterConfig cfg_;
  KineticParams kin_;
  StoichMatrix stoich_;
  mutable Rk4Workspace ws_;
  mutable std::vector<double> y_;
};

/// Effluent NO2/NO3 as the controller sees them: sampled on a fixed grid,
/// delayed by tau, corrupted by seeded Gaussian noise, held between samples.
struct SensorModel {
  double dt_sample = 120.0 / 86400.0;  // d
  double tau = 0.0;                    // d, transport/analysis delay
  double noise_sigma = 0.0;            // gN/m3
  std::uint64_t seed = 43;             // matches the default run seed + 1

  void validate() const;
};

struct Measurement {
  double NO2_out = 0.0;  // gN/m3
  double NO3_out = 0.0;  // gN/m3
  double Q = 0.0;        // m3/d
  bool flagged = false;  // insufficient history for the requested delay
};

class EffluentSensor {
 public:
  explicit EffluentSensor(const SensorModel& m);

  /// Record the true effluent after every plant step (and once at t = 0).
  void push(double t, double no2, double no3);

  /// Draw a sample at time t (call on the dt_sample grid). Values are the
  /// recorded series at t - tau (linearly interpolated) plus noise, floored
  /// at zero. Returns the first recorded value flagged when t - tau
  /// precedes the history.
  Measurement sample(double t, double Q);

  /// Last sample, unchanged between sample() calls (zero-order hold).
  const Measurement& held() const { return held_; }

 private:
  struct Point {
    double t, no2, no3;
  };
  double interp(double t, double Point::*field) const;

  SensorModel model_;
  std::deque<Point> hist_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Measurement held_{};
};

}  // namespace denitsim
