#include "denitsim/biofilter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "denitsim/errors.hpp"

namespace denitsim {

namespace {

// Layers thinner than this carry no resolvable liquid volume; soluble
// transport and reaction are suspended for them (areal attachment and
// detachment still apply, so an empty film can be re-seeded).
constexpr double kMinTransportThickness = 1e-9;  // m

constexpr double kStateAbortMagnitude = 1e12;

}  // namespace

void BiofilterConfig::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(n_tanks >= 1, "n_tanks must be >= 1");
  require(V_total > 0.0, "V_total must be > 0");
  require(porosity > 0.0 && porosity < 1.0, "porosity must be in (0,1)");
  require(a_spec > 0.0, "a_spec must be > 0");
  require(h_bed > 0.0, "h_bed must be > 0");
  require(n_layers >= 1, "n_layers must be >= 1");
  require(rho_f > 0.0, "rho_f must be > 0");
  for (double d : D_eff) require(d >= 0.0, "D_eff must be >= 0");
  require(k_L >= 0.0, "k_L must be >= 0");
  require(lambda_f >= 0.0, "lambda_f must be >= 0");
  require(k_det >= 0.0, "k_det must be >= 0");
  require(L_min > 0.0, "L_min must be > 0");
  require(f_bw >= 0.0 && f_bw <= 1.0, "f_bw must be in [0,1]");
  require(t_bw >= 0.0 && t_bw < 1.0, "t_bw must be in [0,1)");
  require(inoculum.thickness >= L_min,
          "inoculum thickness must be >= L_min");
  require(inoculum.X_H_fraction >= 0.0 && inoculum.X_H_fraction <= 1.0,
          "inoculum X_H_fraction must be in [0,1]");
  if (bad.tellp() > 0) throw ConfigError("plant: " + bad.str());
}

double TankState::film_thickness(double rho_f) const {
  double L = 0.0;
  for (const FilmLayer& l : film) L += l.thickness(rho_f);
  return L;
}

double dose_to_concentration(double u_kgCOD_d, double Q_m3d) {
  if (Q_m3d <= 0.0) {
    throw NumericalFault("dose_to_concentration: flow must be positive");
  }
  return std::max(0.0, u_kgCOD_d) * 1000.0 / Q_m3d;
}

Biofilter::Biofilter(const BiofilterConfig& cfg, const KineticParams& kin)
    : cfg_(cfg), kin_(kin) {
  cfg_.validate();
  kin_.validate();
  stoich_ = build_stoichiometry(kin_);
}

PlantState Biofilter::init_plant() const {
  PlantState s;
  s.tanks.resize(static_cast<std::size_t>(cfg_.n_tanks));
  const double h0 = cfg_.inoculum.thickness / cfg_.n_layers;
  const double a_h = cfg_.inoculum.X_H_fraction * cfg_.rho_f * h0;
  const double a_i = (1.0 - cfg_.inoculum.X_H_fraction) * cfg_.rho_f * h0;
  for (TankState& tank : s.tanks) {
    tank.bulk = Components{};
    tank.film.assign(static_cast<std::size_t>(cfg_.n_layers), FilmLayer{});
    for (FilmLayer& l : tank.film) {
      l.a_XH = a_h;
      l.a_XI = a_i;
    }
  }
  return s;
}

std::size_t Biofilter::state_size() const {
  const std::size_t per_tank =
      kComponentCount + static_cast<std::size_t>(cfg_.n_layers) *
                            (2 + kSolubleCount);
  return static_cast<std::size_t>(cfg_.n_tanks) * per_tank + 6;
}

void Biofilter::flatten(const PlantState& s, std::vector<double>& y) const {
  y.resize(state_size());
  std::size_t k = 0;
  for (const TankState& tank : s.tanks) {
    for (double v : tank.bulk) y[k++] = v;
    for (const FilmLayer& l : tank.film) {
      y[k++] = l.a_XH;
      y[k++] = l.a_XI;
      for (double v : l.w) y[k++] = v;
    }
  }
  y[k++] = s.totals.n_in_g;
  y[k++] = s.totals.n_out_g;
  y[k++] = s.totals.cod_in_g;
  y[k++] = s.totals.cod_out_g;
  y[k++] = s.totals.cod_dosed_g;
  y[k++] = s.totals.cod_reduced_g;
}

void Biofilter::unflatten(const std::vector<double>& y, PlantState& s) const {
  std::size_t k = 0;
  for (TankState& tank : s.tanks) {
    for (double& v : tank.bulk) v = y[k++];
    for (FilmLayer& l : tank.film) {
      l.a_XH = y[k++];
      l.a_XI = y[k++];
      for (double& v : l.w) v = y[k++];
    }
  }
  s.totals.n_in_g = y[k++];
  s.totals.n_out_g = y[k++];
  s.totals.cod_in_g = y[k++];
  s.totals.cod_out_g = y[k++];
  s.totals.cod_dosed_g = y[k++];
  s.totals.cod_reduced_g = y[k++];
}

void Biofilter::rhs(double t, const std::vector<double>& y,
                    const InfluentFn& influent, double u_kgCOD_d,
                    std::vector<double>& dydt) const {
  const InfluentState in = influent(t);
  if (in.Q <= 0.0) {
    throw NumericalFault("plant derivatives: influent flow must be positive");
  }
  const double dose =
      u_kgCOD_d > 0.0 ? dose_to_concentration(u_kgCOD_d, in.Q) : 0.0;

  const int nl = cfg_.n_layers;
  const std::size_t stride =
      kComponentCount + static_cast<std::size_t>(nl) * (2 + kSolubleCount);
  const double V_liq = cfg_.liquid_volume_per_tank();
  const double A_f = cfg_.film_area_per_tank();
  const double area_per_liquid = cfg_.a_spec / cfg_.porosity;  // m2/m3
  const double D_hyd = in.Q / V_liq;                           // 1/d
  const double v_filt = cfg_.filtration_velocity(in.Q);        // m/d

  dydt.assign(y.size(), 0.0);
  double cod_reduced_rate = 0.0;  // g/d, electron sink over the whole plant

  // Local kinetics at one point; returns dC/dt and accumulates the
  // volume-weighted acceptor uptake.
  auto site = [&](const Components& c, double volume_g_per_unit,
                  Components& d) {
    const ProcessRates r = process_rates(c, kin_);
    const std::array<double, 3> rho = {r.growth_no3, r.growth_no2, r.decay};
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < kComponentCount; ++i) {
        d[i] += stoich_.row[j][i] * rho[j];
      }
    }
    cod_reduced_rate += acceptor_uptake_rate(r, kin_) * volume_g_per_unit;
  };

  Components c_prev = {in.C_SS + dose, in.C_NO3, in.C_NO2, 0.0, 0.0, 0.0};

  for (int i = 0; i < cfg_.n_tanks; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * stride;
    const double* b = &y[base];
    double* db = &dydt[base];

    Components bulk;
    for (int c = 0; c < kComponentCount; ++c) bulk[c] = b[c];

    // Advection through the tank train.
    for (int c = 0; c < kComponentCount; ++c) {
      db[c] += D_hyd * (c_prev[c] - bulk[c]);
    }

    // Suspended-phase kinetics.
    {
      Components d{};
      site(bulk, V_liq, d);
      for (int c = 0; c < kComponentCount; ++c) db[c] += d[c];
    }

    // Film geometry for this tank.
    double L_f = 0.0;
    for (int l = 0; l < nl; ++l) {
      const std::size_t fb = base + kComponentCount +
                             static_cast<std::size_t>(l) * (2 + kSolubleCount);
      L_f += (y[fb] + y[fb + 1]) / cfg_.rho_f;
    }
    const double b_det = cfg_.k_det * L_f;  // 1/d

    // Per-layer reaction, then diffusion between layer centres, then the
    // boundary exchange with the bulk at the film surface.
    double L_prev = 0.0;
    std::array<double, kSolubleCount> s_prev{};
    bool prev_alive = false;
    for (int l = 0; l < nl; ++l) {
      const std::size_t fb = base + kComponentCount +
                             static_cast<std::size_t>(l) * (2 + kSolubleCount);
      const double m = y[fb] + y[fb + 1];
      const double L_l = m / cfg_.rho_f;
      const bool alive = L_l > kMinTransportThickness;

      std::array<double, kSolubleCount> s{};
      if (alive) {
        Components c;
        c[kXH] = cfg_.rho_f * y[fb] / m;
        c[kXI] = cfg_.rho_f * y[fb + 1] / m;
        for (int cc = 0; cc < kSolubleCount; ++cc) {
          s[cc] = y[fb + 2 + cc] / L_l;
          c[cc] = s[cc];
        }
        Components d{};
        site(c, L_l * A_f, d);
        dydt[fb] += d[kXH] * L_l;
        dydt[fb + 1] += d[kXI] * L_l;
        for (int cc = 0; cc < kSolubleCount; ++cc) {
          dydt[fb + 2 + cc] += d[cc] * L_l;
        }

        if (prev_alive) {
          const double gap = 0.5 * (L_prev + L_l);  // centre-to-centre, m
          const std::size_t fb_prev = fb - (2 + kSolubleCount);
          for (int cc = 0; cc < kSolubleCount; ++cc) {
            // Flux from the inner layer (l-1) toward this one, g/(m2 d).
            const double J = cfg_.D_eff[cc] * (s_prev[cc] - s[cc]) / gap;
            dydt[fb_prev + 2 + cc] -= J;
            dydt[fb + 2 + cc] += J;
          }
        }
      }
      L_prev = L_l;
      for (int cc = 0; cc < kSolubleCount; ++cc) s_prev[cc] = s[cc];
      prev_alive = alive;
    }

    // Surface layer: exchange with the bulk, attachment, detachment.
    const std::size_t top = base + kComponentCount +
                            static_cast<std::size_t>(nl - 1) *
                                (2 + kSolubleCount);
    const double m_top = y[top] + y[top + 1];
    const double L_top = m_top / cfg_.rho_f;
    if (L_top > kMinTransportThickness) {
      for (int cc = 0; cc < kSolubleCount; ++cc) {
        const double s_top = y[top + 2 + cc] / L_top;
        const double J_out = cfg_.k_L * (s_top - bulk[cc]);  // g/(m2 d)
        dydt[top + 2 + cc] -= J_out;
        db[cc] += J_out * area_per_liquid;
      }
    }
    {
      // Deep-bed capture of suspended particulates onto the film surface.
      const double att_xh = cfg_.lambda_f * v_filt * std::max(0.0, bulk[kXH]);
      const double att_xi = cfg_.lambda_f * v_filt * std::max(0.0, bulk[kXI]);
      dydt[top] += att_xh / cfg_.a_spec;
      dydt[top + 1] += att_xi / cfg_.a_spec;
      db[kXH] -= att_xh / cfg_.porosity;
      db[kXI] -= att_xi / cfg_.porosity;

      // First-order surface erosion, faster for thicker films.
      const double det_xh = b_det * std::max(0.0, y[top]);
      const double det_xi = b_det * std::max(0.0, y[top + 1]);
      dydt[top] -= det_xh;
      dydt[top + 1] -= det_xi;
      db[kXH] += det_xh * area_per_liquid;
      db[kXI] += det_xi * area_per_liquid;
      // Detached solubles travel with the eroded volume.
      if (m_top > 0.0) {
        for (int cc = 0; cc < kSolubleCount; ++cc) {
          const double det_w = b_det * std::max(0.0, y[top + 2 + cc]);
          dydt[top + 2 + cc] -= det_w;
          db[cc] += det_w * area_per_liquid;
        }
      }
    }

    for (int c = 0; c < kComponentCount; ++c) c_prev[c] = bulk[c];
  }

  // Boundary-flow integrals (c_prev now holds the last tank's bulk).
  const std::size_t tb = static_cast<std::size_t>(cfg_.n_tanks) * stride;
  dydt[tb + 0] = in.Q * (in.C_NO3 + in.C_NO2);
  dydt[tb + 1] = in.Q * (c_prev[kSNO3] + c_prev[kSNO2] + c_prev[kSN2]);
  dydt[tb + 2] = in.Q * in.C_SS;
  dydt[tb + 3] = in.Q * (c_prev[kSS] + c_prev[kXH] + c_prev[kXI]);
  dydt[tb + 4] = in.Q * dose;
  dydt[tb + 5] = cod_reduced_rate;
}

void Biofilter::derivatives(const PlantState& s, const InfluentState& in,
                            double u_kgCOD_d, PlantState& dsdt) const {
  std::vector<double> y, dy;
  flatten(s, y);
  rhs(s.t, y, [&in](double) { return in; }, u_kgCOD_d, dy);
  dsdt = s;
  unflatten(dy, dsdt);
  dsdt.t = 1.0;  // dt/dt
  dsdt.sludge = MassLedger{};
  dsdt.clamp_cod_g = 0.0;
  dsdt.clamp_n_g = 0.0;
}

void Biofilter::step(PlantState& s, const InfluentFn& influent,
                     double u_kgCOD_d, double dt) const {
  if (!(dt > 0.0)) throw ConfigError("step: dt must be > 0");
  flatten(s, y_);
  rk4_step(
      y_, s.t, dt,
      [this, &influent, u_kgCOD_d](double t, const std::vector<double>& y,
                                   std::vector<double>& dydt) {
        rhs(t, y, influent, u_kgCOD_d, dydt);
      },
      ws_);
  unflatten(y_, s);
  s.t += dt;
  clamp_negatives(s);
  for (TankState& tank : s.tanks) relayer(tank);
  fault_check(s);
}

void Biofilter::clamp_negatives(PlantState& s) const {
  const double V_liq = cfg_.liquid_volume_per_tank();
  const double A_f = cfg_.film_area_per_tank();
  auto clamp = [&s](double& value, double to_mass, bool is_nitrogen) {
    if (value < 0.0) {
      (is_nitrogen ? s.clamp_n_g : s.clamp_cod_g) -= value * to_mass;
      value = 0.0;
    }
  };
  for (TankState& tank : s.tanks) {
    for (int c = 0; c < kComponentCount; ++c) {
      clamp(tank.bulk[c], V_liq, c == kSNO3 || c == kSNO2 || c == kSN2);
    }
    for (FilmLayer& l : tank.film) {
      clamp(l.a_XH, A_f, false);
      clamp(l.a_XI, A_f, false);
      clamp(l.w[kSS], A_f, false);
      clamp(l.w[kSNO3], A_f, true);
      clamp(l.w[kSNO2], A_f, true);
      clamp(l.w[kSN2], A_f, true);
    }
  }
}

void Biofilter::relayer(TankState& tank) const {
  const int n = cfg_.n_layers;
  if (n == 1) return;
  double L = tank.film_thickness(cfg_.rho_f);
  if (L <= 0.0) return;
  const double h = L / n;

  std::vector<FilmLayer> out(static_cast<std::size_t>(n));
  double z0 = 0.0;  // running lower edge of the old layer
  for (const FilmLayer& old : tank.film) {
    const double L_l = old.thickness(cfg_.rho_f);
    if (L_l <= 0.0) continue;
    const double z1 = z0 + L_l;
    int j = std::clamp(static_cast<int>(z0 / h), 0, n - 1);
    double lo = z0;
    while (lo < z1 - 1e-30) {
      const double hi = std::min(z1, (j + 1) * h);
      const double frac = (std::max(hi, lo) - lo) / L_l;
      FilmLayer& nw = out[static_cast<std::size_t>(j)];
      nw.a_XH += frac * old.a_XH;
      nw.a_XI += frac * old.a_XI;
      for (int cc = 0; cc < kSolubleCount; ++cc) {
        nw.w[cc] += frac * old.w[cc];
      }
      lo = hi;
      if (j < n - 1) {
        ++j;
      } else {
        // Rounding can leave a sliver beyond the last new boundary; it
        // belongs to the top layer.
        if (lo < z1) {
          const double rem = (z1 - lo) / L_l;
          FilmLayer& top = out.back();
          top.a_XH += rem * old.a_XH;
          top.a_XI += rem * old.a_XI;
          for (int cc = 0; cc < kSolubleCount; ++cc) {
            top.w[cc] += rem * old.w[cc];
          }
        }
        break;
      }
    }
    z0 = z1;
  }
  tank.film = std::move(out);
}

void Biofilter::fault_check(const PlantState& s) const {
  auto bad = [](double v) {
    return !std::isfinite(v) || std::abs(v) > kStateAbortMagnitude;
  };
  for (std::size_t i = 0; i < s.tanks.size(); ++i) {
    const TankState& tank = s.tanks[i];
    for (int c = 0; c < kComponentCount; ++c) {
      if (bad(tank.bulk[c])) {
        throw NumericalFault(
            "integration unstable: tank " + std::to_string(i + 1) + " bulk " +
            component_name(c) + " at t = " + std::to_string(s.t) + " d");
      }
    }
    for (std::size_t l = 0; l < tank.film.size(); ++l) {
      const FilmLayer& f = tank.film[l];
      const bool ok = !bad(f.a_XH) && !bad(f.a_XI) && !bad(f.w[0]) &&
                      !bad(f.w[1]) && !bad(f.w[2]) && !bad(f.w[3]);
      if (!ok) {
        throw NumericalFault(
            "integration unstable: tank " + std::to_string(i + 1) + " film " +
            std::to_string(l + 1) + " at t = " + std::to_string(s.t) + " d");
      }
    }
  }
}

void Biofilter::apply_backwash(PlantState& s) const {
  if (cfg_.f_bw <= 0.0) return;
  const double A_f = cfg_.film_area_per_tank();
  for (TankState& tank : s.tanks) {
    const double L = tank.film_thickness(cfg_.rho_f);
    double remove = std::min(cfg_.f_bw * L, std::max(0.0, L - cfg_.L_min));
    // Peel from the surface inward.
    for (int l = cfg_.n_layers - 1; l >= 0 && remove > 0.0; --l) {
      FilmLayer& layer = tank.film[static_cast<std::size_t>(l)];
      const double L_l = layer.thickness(cfg_.rho_f);
      if (L_l <= 0.0) continue;
      const double frac = std::min(1.0, remove / L_l);
      s.sludge.cod_g +=
          frac * (layer.a_XH + layer.a_XI + layer.w[kSS]) * A_f;
      s.sludge.n_g +=
          frac * (layer.w[kSNO3] + layer.w[kSNO2] + layer.w[kSN2]) * A_f;
      layer.a_XH *= 1.0 - frac;
      layer.a_XI *= 1.0 - frac;
      for (int cc = 0; cc < kSolubleCount; ++cc) layer.w[cc] *= 1.0 - frac;
      remove -= frac * L_l;
    }
    // The scour levels the slab grid even when the floor blocks removal.
    relayer(tank);
  }
}

void SensorModel::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(dt_sample > 0.0, "dt_sample must be > 0");
  require(tau >= 0.0, "tau must be >= 0");
  require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
  if (bad.tellp() > 0) throw ConfigError("sensor: " + bad.str());
}

EffluentSensor::EffluentSensor(const SensorModel& m) : model_(m), rng_(m.seed) {
  model_.validate();
}

void EffluentSensor::push(double t, double no2, double no3) {
  if (!hist_.empty() && !(t > hist_.back().t)) {
    if (t == hist_.back().t) return;  // idempotent re-push at the same time
    throw NumericalFault("sensor history must advance in time");
  }
  hist_.push_back({t, no2, no3});
  const double cutoff = t - model_.tau - 2.0 * model_.dt_sample;
  while (hist_.size() > 2 && hist_[1].t <= cutoff) hist_.pop_front();
}

double EffluentSensor::interp(double t, double Point::*field) const {
  if (t <= hist_.front().t) return hist_.front().*field;
  if (t >= hist_.back().t) return hist_.back().*field;
  auto it = std::lower_bound(
      hist_.begin(), hist_.end(), t,
      [](const Point& p, double value) { return p.t < value; });
  const Point& b = *it;
  const Point& a = *(it - 1);
  const double f = (t - a.t) / (b.t - a.t);
  return a.*field + f * (b.*field - a.*field);
}

Measurement EffluentSensor::sample(double t, double Q) {
  Measurement m;
  m.Q = Q;
  if (hist_.empty()) {
    m.flagged = true;
  } else {
    const double target = t - model_.tau;
    m.flagged = target < hist_.front().t;
    m.NO2_out = interp(target, &Point::no2);
    m.NO3_out = interp(target, &Point::no3);
    if (model_.noise_sigma > 0.0) {
      m.NO2_out += model_.noise_sigma * normal_(rng_);
      m.NO3_out += model_.noise_sigma * normal_(rng_);
    }
    m.NO2_out = std::max(0.0, m.NO2_out);
    m.NO3_out = std::max(0.0, m.NO3_out);
  }
  held_ = m;
  return m;
}

}  // namespace denitsim
