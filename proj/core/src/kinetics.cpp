#include "denitsim/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "denitsim/errors.hpp"

namespace denitsim {

namespace {

// 8 gCOD per electron-mol, 14 gN per mol N.
constexpr double kCodPerElectronMol = 8.0;
constexpr double kGramsPerMolN = 14.0;

double monod(double s, double k) {
  const double sp = std::max(0.0, s);
  return sp / (k + sp);
}

}  // namespace

const char* component_name(int idx) {
  switch (idx) {
    case kSS:
      return "S_S";
    case kSNO3:
      return "S_NO3";
    case kSNO2:
      return "S_NO2";
    case kSN2:
      return "S_N2";
    case kXH:
      return "X_H";
    case kXI:
      return "X_I";
    default:
      return "?";
  }
}

const Components& cod_content() {
  static const Components v = {
      1.0,
      -acceptor_cod_equivalent(ReductionStep::kNO3toNO2) -
          acceptor_cod_equivalent(ReductionStep::kNO2toN2),  // -40/14
      -acceptor_cod_equivalent(ReductionStep::kNO2toN2),     // -24/14
      0.0,  // N2 is the oxidation reference state
      1.0,
      1.0,
  };
  return v;
}

Components nitrogen_content(double i_XB) {
  return {0.0, 1.0, 1.0, 1.0, i_XB, 0.0};
}

void KineticParams::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(mu_H > 0.0, "mu_H must be > 0");
  require(K_S > 0.0, "K_S must be > 0");
  require(K_NO3 > 0.0, "K_NO3 must be > 0");
  require(K_NO2 > 0.0, "K_NO2 must be > 0");
  require(eta_NO3 > 0.0 && eta_NO3 <= 1.0, "eta_NO3 must be in (0,1]");
  require(eta_NO2 > 0.0 && eta_NO2 <= 1.0, "eta_NO2 must be in (0,1]");
  require(Y_H > 0.0 && Y_H < 1.0, "Y_H must be in (0,1)");
  require(b_H >= 0.0, "b_H must be >= 0");
  require(f_I >= 0.0 && f_I <= 1.0, "f_I must be in [0,1]");
  require(i_XB == 0.0,
          "i_XB must be 0 (a biomass N content needs an ammonia pool this "
          "model does not carry)");
  if (bad.tellp() > 0) throw ConfigError("kinetics: " + bad.str());
}

double acceptor_cod_equivalent(ReductionStep step) {
  switch (step) {
    case ReductionStep::kNO3toNO2:
      return 2.0 * kCodPerElectronMol / kGramsPerMolN;  // 16/14
    case ReductionStep::kNO2toN2:
      return 3.0 * kCodPerElectronMol / kGramsPerMolN;  // 24/14
  }
  return 0.0;
}

StoichMatrix build_stoichiometry(const KineticParams& p) {
  p.validate();
  const double e1 = acceptor_cod_equivalent(ReductionStep::kNO3toNO2);
  const double e2 = acceptor_cod_equivalent(ReductionStep::kNO2toN2);
  const double nox1 = (1.0 - p.Y_H) / (e1 * p.Y_H);  // gN reduced per gCOD grown
  const double nox2 = (1.0 - p.Y_H) / (e2 * p.Y_H);

  StoichMatrix m;
  // Anoxic growth on nitrate: substrate -> biomass, NO3 -> NO2.
  m.row[0][kSS] = -1.0 / p.Y_H;
  m.row[0][kSNO3] = -nox1;
  m.row[0][kSNO2] = +nox1;
  m.row[0][kXH] = 1.0;
  // Anoxic growth on nitrite: substrate -> biomass, NO2 -> N2.
  m.row[1][kSS] = -1.0 / p.Y_H;
  m.row[1][kSNO2] = -nox2;
  m.row[1][kSN2] = +nox2;
  m.row[1][kXH] = 1.0;
  // Decay: biomass -> inerts + recycled substrate (death-regeneration).
  m.row[2][kXH] = -1.0;
  m.row[2][kXI] = p.f_I;
  m.row[2][kSS] = 1.0 - p.f_I;
  return m;
}

ProcessRates process_rates(const Components& c, const KineticParams& p) {
  const double xh = std::max(0.0, c[kXH]);
  const double common = p.mu_H * monod(c[kSS], p.K_S) * xh;
  ProcessRates r;
  r.growth_no3 = p.eta_NO3 * common * monod(c[kSNO3], p.K_NO3);
  r.growth_no2 = p.eta_NO2 * common * monod(c[kSNO2], p.K_NO2);
  r.decay = p.b_H * xh;
  return r;
}

Components conversion_derivatives(const Components& c, const KineticParams& p,
                                  const StoichMatrix& m) {
  const ProcessRates r = process_rates(c, p);
  const std::array<double, 3> rho = {r.growth_no3, r.growth_no2, r.decay};
  Components d{};
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < kComponentCount; ++i) d[i] += m.row[j][i] * rho[j];
  }
  return d;
}

Components conversion_derivatives(const Components& c, const KineticParams& p) {
  return conversion_derivatives(c, p, build_stoichiometry(p));
}

double acceptor_uptake_rate(const ProcessRates& r, const KineticParams& p) {
  return (r.growth_no3 + r.growth_no2) * (1.0 - p.Y_H) / p.Y_H;
}

double ContinuityResiduals::max_abs() const {
  double m = 0.0;
  for (double v : cod) m = std::max(m, std::abs(v));
  for (double v : nitrogen) m = std::max(m, std::abs(v));
  return m;
}

ContinuityResiduals check_continuity(const StoichMatrix& m, double i_XB) {
  const Components& icod = cod_content();
  const Components in = nitrogen_content(i_XB);
  ContinuityResiduals res;
  for (int j = 0; j < 3; ++j) {
    double c = 0.0, n = 0.0;
    for (int i = 0; i < kComponentCount; ++i) {
      c += icod[i] * m.row[j][i];
      n += in[i] * m.row[j][i];
    }
    res.cod[j] = c;
    res.nitrogen[j] = n;
  }
  return res;
}

}  // namespace denitsim
