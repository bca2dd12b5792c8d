#include "denitsim/influent.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "denitsim/errors.hpp"

namespace denitsim {

void InfluentProfile::validate() const {
  std::ostringstream bad;
  auto require = [&bad](bool ok, const char* what) {
    if (!ok) bad << (bad.tellp() > 0 ? "; " : "") << what;
  };
  require(Q_base > 0.0, "Q_base must be > 0");
  require(NO3_base >= 0.0, "NO3_base must be >= 0");
  require(NO3_amp >= 0.0, "NO3_amp must be >= 0");
  require(NO3_base >= NO3_amp, "NO3_base must be >= NO3_amp");
  require(interday_sigma >= 0.0, "interday_sigma must be >= 0");
  require(NO2_in >= 0.0, "NO2_in must be >= 0");
  require(SS_in >= 0.0, "SS_in must be >= 0");
  if (bad.tellp() > 0) throw ConfigError("influent: " + bad.str());
}

InfluentGenerator::InfluentGenerator(const InfluentProfile& profile,
                                     double horizon_days)
    : profile_(profile) {
  profile_.validate();
  const int days = std::max(1, static_cast<int>(std::ceil(horizon_days)) + 1);
  day_base_.resize(static_cast<std::size_t>(days));
  // Saturated random walk on the daily base. A fresh engine per generator
  // keeps generate() a pure function of (t, profile).
  std::mt19937_64 rng(profile_.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double cap = 3.0 * profile_.interday_sigma;
  double w = 0.0;
  for (int d = 0; d < days; ++d) {
    w = std::clamp(w + profile_.interday_sigma * normal(rng), -cap, cap);
    day_base_[static_cast<std::size_t>(d)] = profile_.NO3_base + w;
  }
}

double InfluentGenerator::day_base(int day) const {
  if (day < 0) day = 0;
  const auto idx =
      std::min(static_cast<std::size_t>(day), day_base_.size() - 1);
  return day_base_[idx];
}

InfluentState InfluentGenerator::at(double t) const {
  const int day = static_cast<int>(std::floor(t));
  const double base = day_base(day);
  const double s =
      std::sin(2.0 * std::numbers::pi * (t - profile_.phase));
  InfluentState in;
  in.Q = profile_.Q_base;
  in.C_NO3 = std::max(0.0, base + profile_.NO3_amp * s);
  in.C_NO2 = profile_.NO2_in;
  in.C_SS = profile_.SS_in;
  return in;
}

InfluentState generate(double t, const InfluentProfile& profile) {
  return InfluentGenerator(profile, std::max(0.0, t)).at(t);
}

CsvSeries::CsvSeries(std::vector<Row> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw ConfigError("influent series: no data rows");
  for (std::size_t i = 1; i < rows_.size(); ++i) {
    if (!(rows_[i].t > rows_[i - 1].t)) {
      throw ConfigError("influent series: time must be strictly increasing "
                        "at row " +
                        std::to_string(i + 2));  // +1 header, +1 one-based
    }
  }
}

InfluentState CsvSeries::at(double t) const {
  auto lerp_row = [](const Row& a, const Row& b, double t) {
    const double f = (t - a.t) / (b.t - a.t);
    Row r;
    r.t = t;
    r.Q = a.Q + f * (b.Q - a.Q);
    r.NO3 = a.NO3 + f * (b.NO3 - a.NO3);
    r.NO2 = a.NO2 + f * (b.NO2 - a.NO2);
    r.SS = a.SS + f * (b.SS - a.SS);
    return r;
  };
  Row r;
  if (t <= rows_.front().t) {
    r = rows_.front();
  } else if (t >= rows_.back().t) {
    r = rows_.back();
  } else {
    auto it = std::lower_bound(
        rows_.begin(), rows_.end(), t,
        [](const Row& row, double value) { return row.t < value; });
    r = lerp_row(*(it - 1), *it, t);
  }
  return InfluentState{r.Q, r.NO3, r.NO2, r.SS};
}

namespace {

double parse_cell(const std::string& cell, std::size_t line_no,
                  const char* col) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  while (ptr != last && (*ptr == ' ' || *ptr == '\t' || *ptr == '\r')) ++ptr;
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw ConfigError("influent series: non-numeric " + std::string(col) +
                      " at row " + std::to_string(line_no));
  }
  return value;
}

}  // namespace

CsvSeries load_timeseries(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("influent series: cannot open " + path);

  std::string line;
  if (!std::getline(f, line)) {
    throw ConfigError("influent series: empty file " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kInfluentCsvHeader) {
    throw ConfigError("influent series: bad header, expected \"" +
                      std::string(kInfluentCsvHeader) + "\"");
  }

  std::vector<CsvSeries::Row> rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string, 5> cell;
    std::size_t n = 0;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (n < cell.size()) cell[n] = tok;
      ++n;
    }
    if (n != cell.size()) {
      throw ConfigError("influent series: expected 5 columns, got " +
                        std::to_string(n) + " at row " +
                        std::to_string(line_no));
    }
    CsvSeries::Row r;
    r.t = parse_cell(cell[0], line_no, "t_d");
    r.Q = parse_cell(cell[1], line_no, "Q_m3d");
    r.NO3 = parse_cell(cell[2], line_no, "NO3_gNm3");
    r.NO2 = parse_cell(cell[3], line_no, "NO2_gNm3");
    r.SS = parse_cell(cell[4], line_no, "SS_gCODm3");
    if (r.Q <= 0.0 || r.NO3 < 0.0 || r.NO2 < 0.0 || r.SS < 0.0) {
      throw ConfigError(
          "influent series: negative concentration or non-positive flow at "
          "row " +
          std::to_string(line_no));
    }
    rows.push_back(r);
  }
  return CsvSeries(std::move(rows));
}

}  // namespace denitsim
