#include "linewidth/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

#include <fftw3.h>

#include "linewidth/errors.hpp"
#include "linewidth/lineshape.hpp"
#include "linewidth/stats.hpp"

namespace linewidth::fourier {

namespace {

// FFTW planning is not thread safe; execution of a plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};

}  // namespace

MagnitudeSpectrum fft_magnitude(std::span<const double> values, double delta_nu) {
  const std::size_t n = values.size();
  if (n < 8) throw DomainError("fft_magnitude: need at least 8 samples");
  if (!(delta_nu > 0.0)) throw DomainError("fft_magnitude: spacing must be > 0");

  std::vector<double> in(values.begin(), values.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  std::unique_ptr<fftw_plan_s, PlanDeleter> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());

  MagnitudeSpectrum res;
  res.frequencies.resize(n);
  res.magnitudes.resize(n);
  const double period = static_cast<double>(n) * delta_nu;
  for (std::size_t k = 0; k < n; ++k) {
    res.frequencies[k] = static_cast<double>(k) / period;
    const std::size_t bin = k <= n / 2 ? k : n - k;  // real input: |X_k| = |X_{N-k}|
    res.magnitudes[k] = std::abs(out[bin]) * delta_nu;
  }
  return res;
}

MagnitudeSpectrum fft_magnitude(std::span<const double> grid, std::span<const double> values) {
  if (grid.size() != values.size()) throw DomainError("fft_magnitude: size mismatch");
  Spectrum s{{grid.begin(), grid.end()}, {values.begin(), values.end()}};
  s.validate();
  return fft_magnitude(values, s.spacing());
}

std::vector<double> FourierDataset::grid() const {
  return {frequencies.begin(), frequencies.begin() + static_cast<std::ptrdiff_t>(truncation)};
}

Eigen::MatrixXd FourierDataset::as_matrix() const {
  return Eigen::Map<const Eigen::MatrixXd>(magnitudes.data(), static_cast<Eigen::Index>(truncation),
                                           static_cast<Eigen::Index>(realizations));
}

double FourierDataset::max_magnitude() const {
  return *std::max_element(magnitudes.begin(), magnitudes.end());
}

double FourierDataset::max_frequency() const { return frequencies[truncation - 1]; }

FourierDataset build_dataset(const std::vector<std::vector<double>>& realizations,
                             double delta_nu, std::size_t truncation) {
  if (realizations.empty()) throw UsageError("build_dataset: no realizations");
  const std::size_t n = realizations.front().size();
  if (truncation < 4) throw UsageError("build_dataset: truncation P must be >= 4");
  if (truncation > n) {
    throw UsageError("build_dataset: truncation P = " + std::to_string(truncation) +
                     " exceeds realization length " + std::to_string(n));
  }
  FourierDataset ds;
  ds.realizations = realizations.size();
  ds.truncation = truncation;
  ds.source_length = n;
  ds.delta_nu = delta_nu;
  ds.magnitudes.reserve(ds.realizations * truncation);
  ds.frequencies.reserve(ds.realizations * truncation);
  for (const auto& r : realizations) {
    if (r.size() != n) throw UsageError("build_dataset: realizations differ in length");
    const auto f = fft_magnitude(r, delta_nu);
    ds.magnitudes.insert(ds.magnitudes.end(), f.magnitudes.begin(),
                         f.magnitudes.begin() + static_cast<std::ptrdiff_t>(truncation));
    ds.frequencies.insert(ds.frequencies.end(), f.frequencies.begin(),
                          f.frequencies.begin() + static_cast<std::ptrdiff_t>(truncation));
  }
  return ds;
}

void write_dataset(std::ostream& out, const FourierDataset& ds) {
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "realization\tbin\txi\tmagnitude\n";
  for (std::size_t j = 0; j < ds.realizations; ++j) {
    for (std::size_t k = 0; k < ds.truncation; ++k) {
      const std::size_t i = j * ds.truncation + k;
      out << j << "\t" << k << "\t" << ds.frequencies[i] << "\t" << ds.magnitudes[i] << "\n";
    }
  }
  out.precision(prec);
}

std::optional<double> gamma_estimate_from_point(double value, double derivative) {
  if (!(value > 0.0)) return std::nullopt;
  return -derivative / (2.0 * std::numbers::pi * value);
}

GammaCurve gamma_curve(std::span<const double> grid, std::span<const gp::JointDraw> draws) {
  if (grid.empty() || grid.front() != 0.0) throw UsageError("gamma_curve: grid must start at 0");
  GammaCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  std::vector<double> column;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    column.clear();
    for (const auto& d : draws) {
      const auto idx = static_cast<Eigen::Index>(g);
      if (auto est = gamma_estimate_from_point(d.values(idx), d.derivatives(idx))) {
        column.push_back(*est);
      } else {
        ++curve.excluded;
      }
    }
    if (column.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      curve.mean.push_back(nan);
      curve.lower.push_back(nan);
      curve.upper.push_back(nan);
      continue;
    }
    const auto iv = stats::central_interval(column, 0.95);
    curve.mean.push_back(stats::mean(column));
    curve.lower.push_back(std::min(iv.lower, curve.mean.back()));
    curve.upper.push_back(std::max(iv.upper, curve.mean.back()));
  }
  return curve;
}

void write_gamma_curve(std::ostream& out, const GammaCurve& curve) {
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "xi\tmean\tlower\tupper\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out << curve.grid[i] << "\t" << curve.mean[i] << "\t" << curve.lower[i] << "\t"
        << curve.upper[i] << "\n";
  }
  out.precision(prec);
}

}  // namespace linewidth::fourier
