#pragma once

#include <span>

namespace linewidth::stats {

double mean(std::span<const double> x);

/// Linearly interpolated empirical quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::span<const double> x, double q);

struct Interval {
  double lower;
  double upper;
};

/// Equal-tailed interval holding `mass` of the samples.
Interval central_interval(std::span<const double> x, double mass);

}  // namespace linewidth::stats
