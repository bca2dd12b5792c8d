#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace denitsim {

/// Boxplot-style summary of one logged series.
struct SummaryStats {
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double d10 = 0.0;
  double d90 = 0.0;
  double min = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1); 0 when n == 1
  std::size_t n = 0;

  double range() const { return max - min; }
};

/// Quantile with linear interpolation between order statistics
/// (h = (n-1)p): continuous in p, endpoints are min and max.
/// `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

/// Throws ConfigError on an empty series.
SummaryStats summarize(std::span<const double> values);

}  // namespace denitsim
