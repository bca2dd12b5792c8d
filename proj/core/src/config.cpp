#include "denitsim/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "denitsim/errors.hpp"
#include "denitsim/version.hpp"

namespace denitsim {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError("config: \"" + section + "\" must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError("config: unknown key \"" + section + "." + key + "\"");
    }
  }
}

void read_num(const json& j, const std::string& section, const char* key,
              double& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: \"" + section + "." + key +
                      "\" must be a number");
  }
  out = v.get<double>();
}

void read_int(const json& j, const std::string& section, const char* key,
              int& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ConfigError("config: \"" + section + "." + key +
                      "\" must be an integer");
  }
  out = v.get<int>();
}

void read_seed(const json& j, const std::string& section, const char* key,
               std::uint64_t& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
    throw ConfigError("config: \"" + section + "." + key +
                      "\" must be a non-negative integer");
  }
  out = v.get<std::uint64_t>();
}

void read_str(const json& j, const std::string& section, const char* key,
              std::string& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw ConfigError("config: \"" + section + "." + key +
                      "\" must be a string");
  }
  out = v.get<std::string>();
}

void parse_plant(const json& j, BiofilterConfig& p) {
  check_keys(j, "plant",
             {"n_tanks", "V_total", "porosity", "a_spec", "h_bed", "n_layers",
              "rho_f", "D_eff", "k_L", "lambda_f", "k_det", "L_min", "f_bw",
              "t_bw", "inoculum"});
  read_int(j, "plant", "n_tanks", p.n_tanks);
  read_num(j, "plant", "V_total", p.V_total);
  read_num(j, "plant", "porosity", p.porosity);
  read_num(j, "plant", "a_spec", p.a_spec);
  read_num(j, "plant", "h_bed", p.h_bed);
  read_int(j, "plant", "n_layers", p.n_layers);
  read_num(j, "plant", "rho_f", p.rho_f);
  if (j.contains("D_eff")) {
    const json& d = j.at("D_eff");
    if (d.is_number()) {
      p.D_eff.fill(d.get<double>());
    } else if (d.is_array() && d.size() == p.D_eff.size()) {
      for (std::size_t i = 0; i < p.D_eff.size(); ++i) {
        if (!d[i].is_number()) {
          throw ConfigError("config: \"plant.D_eff\" entries must be numbers");
        }
        p.D_eff[i] = d[i].get<double>();
      }
    } else {
      throw ConfigError(
          "config: \"plant.D_eff\" must be a number or an array of 4");
    }
  }
  read_num(j, "plant", "k_L", p.k_L);
  read_num(j, "plant", "lambda_f", p.lambda_f);
  read_num(j, "plant", "k_det", p.k_det);
  read_num(j, "plant", "L_min", p.L_min);
  read_num(j, "plant", "f_bw", p.f_bw);
  read_num(j, "plant", "t_bw", p.t_bw);
  if (j.contains("inoculum")) {
    const json& i = j.at("inoculum");
    check_keys(i, "plant.inoculum", {"thickness", "X_H_fraction"});
    read_num(i, "plant.inoculum", "thickness", p.inoculum.thickness);
    read_num(i, "plant.inoculum", "X_H_fraction", p.inoculum.X_H_fraction);
  }
}

void parse_kinetics(const json& j, KineticParams& k) {
  check_keys(j, "kinetics",
             {"mu_H", "K_S", "K_NO3", "K_NO2", "eta_NO3", "eta_NO2", "Y_H",
              "b_H", "f_I", "i_XB"});
  read_num(j, "kinetics", "mu_H", k.mu_H);
  read_num(j, "kinetics", "K_S", k.K_S);
  read_num(j, "kinetics", "K_NO3", k.K_NO3);
  read_num(j, "kinetics", "K_NO2", k.K_NO2);
  read_num(j, "kinetics", "eta_NO3", k.eta_NO3);
  read_num(j, "kinetics", "eta_NO2", k.eta_NO2);
  read_num(j, "kinetics", "Y_H", k.Y_H);
  read_num(j, "kinetics", "b_H", k.b_H);
  read_num(j, "kinetics", "f_I", k.f_I);
  read_num(j, "kinetics", "i_XB", k.i_XB);
}

void parse_influent(const json& j, InfluentSpec& in, std::uint64_t run_seed) {
  check_keys(j, "influent", {"profile", "csv"});
  if (j.contains("profile") && j.contains("csv")) {
    throw ConfigError(
        "config: \"influent\" must give either \"profile\" or \"csv\", not "
        "both");
  }
  in.profile.seed = run_seed;
  if (j.contains("csv")) {
    in.use_csv = true;
    if (!j.at("csv").is_string()) {
      throw ConfigError("config: \"influent.csv\" must be a path string");
    }
    in.csv_path = j.at("csv").get<std::string>();
    return;
  }
  if (j.contains("profile")) {
    const json& p = j.at("profile");
    check_keys(p, "influent.profile",
               {"Q_base", "NO3_base", "NO3_amp", "phase", "interday_sigma",
                "NO2_in", "SS_in", "seed"});
    read_num(p, "influent.profile", "Q_base", in.profile.Q_base);
    read_num(p, "influent.profile", "NO3_base", in.profile.NO3_base);
    read_num(p, "influent.profile", "NO3_amp", in.profile.NO3_amp);
    read_num(p, "influent.profile", "phase", in.profile.phase);
    read_num(p, "influent.profile", "interday_sigma",
             in.profile.interday_sigma);
    read_num(p, "influent.profile", "NO2_in", in.profile.NO2_in);
    read_num(p, "influent.profile", "SS_in", in.profile.SS_in);
    read_seed(p, "influent.profile", "seed", in.profile.seed);
  }
}

void parse_control(const json& j, ScenarioSpec& s) {
  check_keys(j, "control", {"mode", "classical", "mfc"});
  if (j.contains("mode")) {
    const json& m = j.at("mode");
    if (!m.is_string()) {
      throw ConfigError("config: \"control.mode\" must be a string");
    }
    const std::string mode = m.get<std::string>();
    if (mode == "classical") {
      s.mode = ControlMode::kClassical;
    } else if (mode == "classical+mfc") {
      s.mode = ControlMode::kClassicalMfc;
    } else {
      throw ConfigError("config: \"control.mode\" must be \"classical\" or "
                        "\"classical+mfc\", got \"" +
                        mode + "\"");
    }
  }
  if (j.contains("classical")) {
    const json& c = j.at("classical");
    check_keys(c, "control.classical", {"K", "C_NO3_set"});
    read_num(c, "control.classical", "K", s.classical.K);
    read_num(c, "control.classical", "C_NO3_set", s.classical.C_NO3_set);
  }
  if (j.contains("mfc")) {
    const json& m = j.at("mfc");
    check_keys(m, "control.mfc",
               {"alpha", "K_p", "T", "y_set", "u_corr_max", "dt_ctrl"});
    read_num(m, "control.mfc", "alpha", s.mfc.alpha);
    read_num(m, "control.mfc", "K_p", s.mfc.K_p);
    read_num(m, "control.mfc", "T", s.mfc.T);
    read_num(m, "control.mfc", "y_set", s.mfc.y_set);
    read_num(m, "control.mfc", "u_corr_max", s.mfc.u_corr_max);
    read_num(m, "control.mfc", "dt_ctrl", s.mfc.dt_ctrl);
  }
}

void parse_run(const json& j, RunConfig& r) {
  check_keys(j, "run",
             {"duration", "warmup", "dt", "seed", "output_csv",
              "output_summary"});
  read_num(j, "run", "duration", r.duration);
  read_num(j, "run", "warmup", r.warmup);
  read_num(j, "run", "dt", r.dt);
  read_seed(j, "run", "seed", r.seed);
  read_str(j, "run", "output_csv", r.output_csv);
  read_str(j, "run", "output_summary", r.output_summary);
}

void parse_sensor(const json& j, SensorModel& s, std::uint64_t run_seed) {
  check_keys(j, "sensor", {"dt_sample", "tau", "noise_sigma", "seed"});
  s.seed = run_seed + 1;
  read_num(j, "sensor", "dt_sample", s.dt_sample);
  read_num(j, "sensor", "tau", s.tau);
  read_num(j, "sensor", "noise_sigma", s.noise_sigma);
  read_seed(j, "sensor", "seed", s.seed);
}

}  // namespace

ScenarioSpec parse_scenario(const json& j) {
  if (!j.is_object()) throw ConfigError("config: root must be a JSON object");
  check_keys(j, "<root>",
             {"plant", "kinetics", "influent", "control", "run", "sensor"});

  ScenarioSpec s;
  if (j.contains("run")) parse_run(j.at("run"), s.run);
  if (j.contains("plant")) parse_plant(j.at("plant"), s.plant);
  if (j.contains("kinetics")) parse_kinetics(j.at("kinetics"), s.kinetics);
  s.influent.profile.seed = s.run.seed;
  s.sensor.seed = s.run.seed + 1;
  if (j.contains("influent")) {
    parse_influent(j.at("influent"), s.influent, s.run.seed);
  }
  if (j.contains("control")) parse_control(j.at("control"), s);
  if (j.contains("sensor")) parse_sensor(j.at("sensor"), s.sensor, s.run.seed);
  s.validate();
  return s;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

nlohmann::json scenario_json(const ScenarioSpec& spec) {
  json j;
  j["plant"] = {
      {"n_tanks", spec.plant.n_tanks},
      {"V_total", spec.plant.V_total},
      {"porosity", spec.plant.porosity},
      {"a_spec", spec.plant.a_spec},
      {"h_bed", spec.plant.h_bed},
      {"n_layers", spec.plant.n_layers},
      {"rho_f", spec.plant.rho_f},
      {"D_eff", spec.plant.D_eff},
      {"k_L", spec.plant.k_L},
      {"lambda_f", spec.plant.lambda_f},
      {"k_det", spec.plant.k_det},
      {"L_min", spec.plant.L_min},
      {"f_bw", spec.plant.f_bw},
      {"t_bw", spec.plant.t_bw},
      {"inoculum",
       {{"thickness", spec.plant.inoculum.thickness},
        {"X_H_fraction", spec.plant.inoculum.X_H_fraction}}},
  };
  j["kinetics"] = {
      {"mu_H", spec.kinetics.mu_H},     {"K_S", spec.kinetics.K_S},
      {"K_NO3", spec.kinetics.K_NO3},   {"K_NO2", spec.kinetics.K_NO2},
      {"eta_NO3", spec.kinetics.eta_NO3}, {"eta_NO2", spec.kinetics.eta_NO2},
      {"Y_H", spec.kinetics.Y_H},       {"b_H", spec.kinetics.b_H},
      {"f_I", spec.kinetics.f_I},       {"i_XB", spec.kinetics.i_XB},
  };
  if (spec.influent.use_csv) {
    j["influent"] = {{"csv", spec.influent.csv_path}};
  } else {
    const InfluentProfile& p = spec.influent.profile;
    j["influent"] = {{"profile",
                      {{"Q_base", p.Q_base},
                       {"NO3_base", p.NO3_base},
                       {"NO3_amp", p.NO3_amp},
                       {"phase", p.phase},
                       {"interday_sigma", p.interday_sigma},
                       {"NO2_in", p.NO2_in},
                       {"SS_in", p.SS_in},
                       {"seed", p.seed}}}};
  }
  j["control"] = {
      {"mode", control_mode_name(spec.mode)},
      {"classical",
       {{"K", spec.classical.K}, {"C_NO3_set", spec.classical.C_NO3_set}}},
      {"mfc",
       {{"alpha", spec.mfc.alpha},
        {"K_p", spec.mfc.K_p},
        {"T", spec.mfc.T},
        {"y_set", spec.mfc.y_set},
        {"u_corr_max", spec.mfc.u_corr_max},
        {"dt_ctrl", spec.mfc.dt_ctrl}}},
  };
  j["sensor"] = {
      {"dt_sample", spec.sensor.dt_sample},
      {"tau", spec.sensor.tau},
      {"noise_sigma", spec.sensor.noise_sigma},
      {"seed", spec.sensor.seed},
  };
  j["run"] = {
      {"duration", spec.run.duration},
      {"warmup", spec.run.warmup},
      {"dt", spec.run.dt},
      {"seed", spec.run.seed},
  };
  return j;
}

std::string spec_hash(const ScenarioSpec& spec) {
  const std::string dump = scenario_json(spec).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

nlohmann::json stats_json(const SummaryStats& s) {
  return {
      {"mean", s.mean}, {"median", s.median}, {"Q25", s.q25},
      {"Q75", s.q75},   {"D10", s.d10},       {"D90", s.d90},
      {"min", s.min},   {"max", s.max},       {"std", s.stddev},
      {"n", s.n},
  };
}

nlohmann::json summary_json(const RunResult& r) {
  const Window w = evaluation_window(r.spec);
  json j;
  j["code_version"] = kVersion;
  j["spec_hash"] = r.spec_hash;
  j["seed"] = r.spec.run.seed;
  j["mode"] = control_mode_name(r.spec.mode);
  j["window"] = {{"t_start", w.t_start}, {"t_end", w.t_end}};
  j["stats"] = {
      {"NO2_out", stats_json(summarize_rows(r.rows, &LogRow::NO2_out, w))},
      {"NO3_out", stats_json(summarize_rows(r.rows, &LogRow::NO3_out, w))},
      {"NOx_out", stats_json(summarize_nox(r.rows, w))},
      {"meoh_kgd", stats_json(summarize_rows(r.rows, &LogRow::meoh, w))},
      {"u_total_kgCODd",
       stats_json(summarize_rows(r.rows, &LogRow::u_total, w))},
  };
  j["mass_balance"] = {
      {"n_in_g", r.totals.n_in_g},
      {"n_out_g", r.totals.n_out_g},
      {"cod_in_g", r.totals.cod_in_g},
      {"cod_out_g", r.totals.cod_out_g},
      {"cod_dosed_g", r.totals.cod_dosed_g},
      {"cod_reduced_g", r.totals.cod_reduced_g},
      {"sludge_cod_g", r.sludge.cod_g},
      {"sludge_n_g", r.sludge.n_g},
      {"clamp_cod_g", r.clamp_cod_g},
      {"clamp_n_g", r.clamp_n_g},
  };
  return j;
}

nlohmann::json report_json(const ComparisonReport& rep) {
  auto strat = [](const StrategySummary& s) {
    return json{
        {"label", s.label},
        {"spec_hash", s.spec_hash},
        {"stats",
         {{"NO2_out", stats_json(s.no2)},
          {"NO3_out", stats_json(s.no3)},
          {"NOx_out", stats_json(s.nox)},
          {"meoh_kgd", stats_json(s.meoh)},
          {"u_total_kgCODd", stats_json(s.u_total)}}},
    };
  };
  json j;
  j["code_version"] = kVersion;
  j["window"] = {{"t_start", rep.window.t_start}, {"t_end", rep.window.t_end}};
  j["a"] = strat(rep.a);
  j["b"] = strat(rep.b);
  j["derived"] = {
      {"no2_range_ratio", rep.no2_range_ratio},
      {"no2_mean_offset_a", rep.no2_mean_offset_a},
      {"no2_mean_offset_b", rep.no2_mean_offset_b},
      {"methanol_delta_pct", rep.methanol_delta_pct},
  };
  return j;
}

nlohmann::json calibration_json(const CalibrationResult& c,
                                const ScenarioSpec& spec, double target,
                                double tol) {
  json evals = json::array();
  for (const auto& [k, mean] : c.evals) evals.push_back({{"K", k}, {"mean_NO2", mean}});
  return {
      {"code_version", kVersion}, {"spec_hash", spec_hash(spec)},
      {"target", target},         {"tol", tol},
      {"K_star", c.K_star},       {"achieved_mean", c.achieved_mean},
      {"iterations", c.iterations}, {"evals", evals},
  };
}

}  // namespace denitsim
