#include "linewidth/lineshape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "linewidth/errors.hpp"

namespace linewidth {

namespace {

const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

}  // namespace

void LineShapeParams::validate() const {
  const std::size_t m = areas.size();
  if (m == 0) throw DomainError("line-shape parameters: no bands");
  if (locations.size() != m || lorentz_widths.size() != m || gauss_widths.size() != m) {
    throw DomainError("line-shape parameters: vectors differ in length");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!(areas[i] > 0.0)) throw DomainError("band " + std::to_string(i) + ": area must be > 0");
    if (!(locations[i] > 0.0)) {
      throw DomainError("band " + std::to_string(i) + ": location must be > 0");
    }
    if (!(lorentz_widths[i] >= 0.0) || !(gauss_widths[i] >= 0.0)) {
      throw DomainError("band " + std::to_string(i) + ": widths must be >= 0");
    }
    if (lorentz_widths[i] == 0.0 && gauss_widths[i] == 0.0) {
      throw DomainError("band " + std::to_string(i) + ": both widths are zero");
    }
  }
}

double Spectrum::spacing() const {
  if (grid.size() < 2) throw DomainError("spectrum has fewer than two points");
  return (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
}

void Spectrum::validate() const {
  if (grid.size() != intensities.size()) {
    throw DomainError("spectrum: grid and intensities differ in length");
  }
  if (grid.size() < 8) throw DomainError("spectrum: at least 8 points required");
  const double step = spacing();
  if (!(step > 0.0)) throw DomainError("spectrum: grid must be strictly increasing");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d = grid[i] - grid[i - 1];
    if (std::abs(d - step) > 1e-9 * step * static_cast<double>(grid.size())) {
      throw DomainError("spectrum: grid spacing is not uniform at index " + std::to_string(i));
    }
  }
  for (double s : intensities) {
    if (!std::isfinite(s)) throw DomainError("spectrum: non-finite intensity");
  }
}

Spectrum Spectrum::crop(double lo, double hi) const {
  if (lo > hi) std::swap(lo, hi);
  if (grid.empty() || lo < grid.front() || hi > grid.back()) {
    throw UsageError("region [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     "] is outside the data range");
  }
  Spectrum out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= lo && grid[i] <= hi) {
      out.grid.push_back(grid[i]);
      out.intensities.push_back(intensities[i]);
    }
  }
  if (out.size() < 8) throw UsageError("region keeps fewer than 8 points");
  return out;
}

std::vector<double> GridSpec::make() const { return uniform_grid(lo, hi, points); }

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "lorentzian") return ScenarioKind::lorentzian;
  if (name == "gaussian") return ScenarioKind::gaussian;
  if (name == "voigt") return ScenarioKind::voigt;
  throw UsageError("unknown scenario kind '" + std::string(name) + "'");
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::lorentzian: return "lorentzian";
    case ScenarioKind::gaussian: return "gaussian";
    case ScenarioKind::voigt: return "voigt";
  }
  return "unknown";
}

double lorentzian(double offset, double hwhm) {
  if (!(hwhm > 0.0)) throw DomainError("lorentzian: width must be > 0");
  return hwhm / (std::numbers::pi * (offset * offset + hwhm * hwhm));
}

double gaussian(double offset, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("gaussian: width must be > 0");
  const double z = offset / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double pseudo_voigt_fwhm(double fl, double fg) {
  const double g2 = fg * fg;
  const double l2 = fl * fl;
  const double sum = g2 * g2 * fg + 2.69269 * g2 * g2 * fl + 2.42843 * g2 * fg * l2 +
                     4.47163 * g2 * l2 * fl + 0.07842 * fg * l2 * l2 + l2 * l2 * fl;
  return std::pow(sum, 0.2);
}

double pseudo_voigt_eta(double hwhm, double sigma) {
  if (sigma == 0.0) return 1.0;
  if (hwhm == 0.0) return 0.0;
  const double fl = 2.0 * hwhm;
  const double q = fl / pseudo_voigt_fwhm(fl, kFwhmPerSigma * sigma);
  return std::clamp(1.36603 * q - 0.47719 * q * q + 0.11116 * q * q * q, 0.0, 1.0);
}

double pseudo_voigt(double offset, double hwhm, double sigma) {
  if (!(hwhm >= 0.0) || !(sigma >= 0.0) || hwhm + sigma <= 0.0) {
    throw DomainError("pseudo_voigt: widths must be >= 0 and not both zero");
  }
  if (sigma == 0.0) return lorentzian(offset, hwhm);
  if (hwhm == 0.0) return gaussian(offset, sigma);
  const double eta = pseudo_voigt_eta(hwhm, sigma);
  return eta * lorentzian(offset, hwhm) + (1.0 - eta) * gaussian(offset, sigma);
}

double gauss_fwhm_for_total(double fwhm_total, double fwhm_lorentz) {
  if (!(fwhm_total > 0.0) || fwhm_lorentz < 0.0 || fwhm_lorentz > fwhm_total) {
    throw DomainError("gauss_fwhm_for_total: need 0 <= lorentz FWHM <= total FWHM");
  }
  // The total width increases monotonically in the Gaussian width and equals
  // the Lorentzian width at zero, so the root lies in [0, total].
  double lo = 0.0;
  double hi = fwhm_total;
  const double tol = 1e-10 * fwhm_total;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pseudo_voigt_fwhm(fwhm_lorentz, mid) < fwhm_total) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw DomainError("uniform_grid: need hi > lo and >= 2 points");
  std::vector<double> grid(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = lo + step * static_cast<double>(i);
  grid.back() = hi;
  return grid;
}

std::vector<double> band_sum(const LineShapeParams& params, std::span<const double> grid) {
  params.validate();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t m = 0; m < params.size(); ++m) {
    for (std::size_t n = 0; n < grid.size(); ++n) {
      out[n] += params.areas[m] * pseudo_voigt(grid[n] - params.locations[m],
                                               params.lorentz_widths[m], params.gauss_widths[m]);
    }
  }
  return out;
}

Spectrum synth_spectrum(const LineShapeParams& params, std::span<const double> grid,
                        const NoiseSpec& noise) {
  if (!(noise.sigma_epsilon >= 0.0)) throw DomainError("noise level must be >= 0");
  Spectrum s;
  s.grid.assign(grid.begin(), grid.end());
  s.intensities = band_sum(params, grid);
  if (noise.sigma_epsilon > 0.0) {
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, noise.sigma_epsilon);
    for (double& v : s.intensities) v += normal(rng);
  }
  return s;
}

double true_mean_gamma(const LineShapeParams& params) {
  params.validate();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < params.size(); ++m) {
    num += params.areas[m] * params.lorentz_widths[m];
    den += params.areas[m];
  }
  return num / den;
}

Scenario sample_scenario(ScenarioKind kind, std::size_t bands, std::uint64_t seed,
                         const GridSpec& grid) {
  if (bands == 0) throw UsageError("scenario needs at least one band");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> area(1.0, 30.0);
  std::uniform_real_distribution<double> location(1625.0, 1675.0);

  Scenario sc;
  sc.kind = kind;
  sc.seed = seed;
  sc.grid = grid;
  auto& p = sc.params;
  for (std::size_t m = 0; m < bands; ++m) {
    p.areas.push_back(area(rng));
    p.locations.push_back(location(rng));
    switch (kind) {
      case ScenarioKind::lorentzian: {
        p.lorentz_widths.push_back(std::uniform_real_distribution<double>(2.5, 20.0)(rng));
        p.gauss_widths.push_back(0.0);
        break;
      }
      case ScenarioKind::gaussian: {
        p.lorentz_widths.push_back(0.0);
        p.gauss_widths.push_back(std::uniform_real_distribution<double>(10.0, 30.0)(rng));
        break;
      }
      case ScenarioKind::voigt: {
        const double var = 0.16;
        const double total = std::lognormal_distribution<double>(std::log(25.0) - var / 2.0,
                                                                 std::sqrt(var))(rng);
        const double fwhm_l = std::uniform_real_distribution<double>(0.0, total)(rng);
        p.lorentz_widths.push_back(fwhm_l / 2.0);
        p.gauss_widths.push_back(gauss_fwhm_for_total(total, fwhm_l) / kFwhmPerSigma);
        break;
      }
    }
  }
  const auto clean = band_sum(p, grid.make());
  sc.noise.sigma_epsilon = 0.05 * *std::max_element(clean.begin(), clean.end());
  sc.noise.seed = seed + 1;
  return sc;
}

}  // namespace linewidth
