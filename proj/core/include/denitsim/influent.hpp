#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace denitsim {

/// Influent condition at one instant.
struct InfluentState {
  double Q = 0.0;      // m3/d
  double C_NO3 = 0.0;  // gN/m3
  double C_NO2 = 0.0;  // gN/m3
  double C_SS = 0.0;   // gCOD/m3 (carbon already present upstream of dosing)
};

/// Synthetic diurnal nitrate profile: a per-day random-walk base plus a
/// sinusoid, floored at zero. Flow is constant. The walk state is saturated
/// at +/-3 sigma so long runs cannot drift into unphysical loads.
struct InfluentProfile {
  double Q_base = 45000.0;      // m3/d
  double NO3_base = 15.0;       // gN/m3
  double NO3_amp = 5.0;         // gN/m3
  double phase = 0.3;           // d; C peaks a quarter-day after `phase`
  double interday_sigma = 1.5;  // gN/m3 per day step
  double NO2_in = 0.5;          // gN/m3
  double SS_in = 5.0;           // gCOD/m3
  std::uint64_t seed = 42;      // matches the default run seed

  void validate() const;
};

/// Precomputes the per-day bases once; use this in loops. at(t) is bitwise
/// identical to generate(t, profile) for the same profile.
class InfluentGenerator {
 public:
  explicit InfluentGenerator(const InfluentProfile& profile,
                             double horizon_days = 64.0);
  InfluentState at(double t) const;
  double day_base(int day) const;  // base level for integer day (>= 0)

 private:
  InfluentProfile profile_;
  std::vector<double> day_base_;
};

/// Pure function of (t, profile): same inputs, same bits.
InfluentState generate(double t, const InfluentProfile& profile);

/// Measured influent time series, linearly interpolated, constant beyond the
/// ends. Loaded from CSV with header
/// t_d,Q_m3d,NO3_gNm3,NO2_gNm3,SS_gCODm3 and strictly increasing time.
class CsvSeries {
 public:
  struct Row {
    double t, Q, NO3, NO2, SS;
  };

  explicit CsvSeries(std::vector<Row> rows);
  InfluentState at(double t) const;
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<Row> rows_;
};

/// Throws ConfigError naming the offending row on malformed input
/// (missing columns, non-numeric cells, non-increasing time, bad header).
CsvSeries load_timeseries(const std::string& path);

inline constexpr const char* kInfluentCsvHeader =
    "t_d,Q_m3d,NO3_gNm3,NO2_gNm3,SS_gCODm3";

}  // namespace denitsim
