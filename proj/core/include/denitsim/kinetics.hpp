#pragma once

#include <array>

#include "denitsim/components.hpp"

namespace denitsim {

/// Heterotrophic two-step denitrification parameters (methanol as the only
/// substrate, NO3 -> NO2 -> N2, no ammonia pool).
struct KineticParams {
  double mu_H = 4.0;     // max growth rate, 1/d
  double K_S = 10.0;     // substrate half-saturation, gCOD/m3
  double K_NO3 = 1.0;    // nitrate half-saturation, gN/m3
  double K_NO2 = 1.0;    // nitrite half-saturation, gN/m3
  double eta_NO3 = 0.8;  // anoxic growth reduction factor, step 1
  double eta_NO2 = 0.6;  // anoxic growth reduction factor, step 2
  double Y_H = 0.3;      // yield, gCOD biomass / gCOD substrate
  double b_H = 0.25;     // decay rate, 1/d
  double f_I = 0.1;      // inert fraction of decayed biomass
  double i_XB = 0.0;     // biomass N content, gN/gCOD (0: no N pool needed)

  /// Throws ConfigError when a parameter is out of range (Y_H must lie in
  /// (0,1), rates and half-saturations must be positive, fractions in [0,1]).
  void validate() const;
};

/// One electron-accepting reduction step.
enum class ReductionStep { kNO3toNO2, kNO2toN2 };

/// Electron-equivalent COD accepted per gN reduced in one step:
/// NO3->NO2 transfers 2 e-/N, NO2->N2 transfers 3 e-/N, at 8 gCOD per
/// electron-mol and 14 gN/mol. Kept as exact fractions (16/14, 24/14).
double acceptor_cod_equivalent(ReductionStep step);

/// Stoichiometric matrix, one row per process:
/// row 0 anoxic growth on NO3 (produces NO2), row 1 anoxic growth on NO2
/// (produces N2), row 2 decay. Columns follow ComponentIndex. Units are
/// per unit of the process rate (gCOD biomass for growth rows, gCOD biomass
/// lost for decay).
struct StoichMatrix {
  std::array<Components, 3> row{};
};

StoichMatrix build_stoichiometry(const KineticParams& p);

/// Process rates, gCOD/(m3 d), evaluated at concentrations c.
/// Negative concentrations are treated as zero inside the Monod factors so
/// the field stays Lipschitz near the positivity boundary.
struct ProcessRates {
  double growth_no3 = 0.0;
  double growth_no2 = 0.0;
  double decay = 0.0;
};

ProcessRates process_rates(const Components& c, const KineticParams& p);

/// dC/dt from local kinetics only: transpose(stoichiometry) * rates.
Components conversion_derivatives(const Components& c, const KineticParams& p);
Components conversion_derivatives(const Components& c, const KineticParams& p,
                                  const StoichMatrix& m);

/// COD consumed by acceptor reduction per unit time, gCOD/(m3 d): the
/// electron flow (1-Y)/Y per unit growth. Integrated by the plant as the
/// "oxidized COD" sink so a plain-COD balance closes.
double acceptor_uptake_rate(const ProcessRates& r, const KineticParams& p);

/// Per-process conservation residuals: dot of each stoichiometric row with
/// the COD and nitrogen content vectors. All entries must vanish (to
/// rounding) for a consistent matrix.
struct ContinuityResiduals {
  std::array<double, 3> cod{};
  std::array<double, 3> nitrogen{};
  double max_abs() const;
};

ContinuityResiduals check_continuity(const StoichMatrix& m, double i_XB = 0.0);

}  // namespace denitsim
