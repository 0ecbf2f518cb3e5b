#include "linewidth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "linewidth/errors.hpp"

namespace linewidth::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw UsageError("mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double quantile(std::span<const double> x, double q) {
  if (x.empty()) throw UsageError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw UsageError("quantile level must be in [0, 1]");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double h = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

Interval central_interval(std::span<const double> x, double mass) {
  const double tail = 0.5 * (1.0 - mass);
  return {quantile(x, tail), quantile(x, 1.0 - tail)};
}

}  // namespace linewidth::stats
