#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linewidth {

/// Per-band parameters of a line-shape mixture. Widths are in cm^-1:
/// `lorentz_widths` are half widths at half maximum, `gauss_widths` are
/// standard deviations.
struct LineShapeParams {
  std::vector<double> areas;
  std::vector<double> locations;
  std::vector<double> lorentz_widths;
  std::vector<double> gauss_widths;

  std::size_t size() const noexcept { return areas.size(); }

  /// Throws DomainError if the vectors disagree in length or a band is invalid.
  void validate() const;
};

/// Uniformly sampled measurement.
struct Spectrum {
  std::vector<double> grid;
  std::vector<double> intensities;

  std::size_t size() const noexcept { return grid.size(); }
  double spacing() const;
  double span() const { return grid.back() - grid.front(); }

  void validate() const;

  /// Points with lo <= grid <= hi. Throws UsageError if the interval is not
  /// inside the grid.
  Spectrum crop(double lo, double hi) const;
};

struct NoiseSpec {
  double sigma_epsilon = 0.0;
  std::uint64_t seed = 0;
};

struct GridSpec {
  double lo = 1550.0;
  double hi = 1750.0;
  std::size_t points = 512;

  std::vector<double> make() const;
};

enum class ScenarioKind { lorentzian, gaussian, voigt };

ScenarioKind parse_scenario_kind(std::string_view name);
std::string to_string(ScenarioKind kind);

struct Scenario {
  ScenarioKind kind = ScenarioKind::lorentzian;
  std::uint64_t seed = 0;
  LineShapeParams params;
  NoiseSpec noise;
  GridSpec grid;
};

double lorentzian(double offset, double hwhm);
double gaussian(double offset, double sigma);

/// Full width at half maximum of the pseudo-Voigt approximation to the
/// Voigt profile with the given component widths.
double pseudo_voigt_fwhm(double fwhm_lorentz, double fwhm_gauss);

/// Mixing weight of the Lorentzian component, in [0, 1].
double pseudo_voigt_eta(double hwhm, double sigma);

double pseudo_voigt(double offset, double hwhm, double sigma);

/// Gaussian FWHM for which the pseudo-Voigt total width equals `fwhm_total`.
double gauss_fwhm_for_total(double fwhm_total, double fwhm_lorentz);

std::vector<double> uniform_grid(double lo, double hi, std::size_t points);

/// Noise-free band sum evaluated on `grid`.
std::vector<double> band_sum(const LineShapeParams& params, std::span<const double> grid);

Spectrum synth_spectrum(const LineShapeParams& params, std::span<const double> grid,
                        const NoiseSpec& noise);

/// Area-weighted mean of the Lorentzian half widths.
double true_mean_gamma(const LineShapeParams& params);

/// Random scenario drawn from the synthetic benchmark distributions. The
/// noise level is 5% of the noise-free maximum on `grid`.
Scenario sample_scenario(ScenarioKind kind, std::size_t bands, std::uint64_t seed,
                         const GridSpec& grid = {});

}  // namespace linewidth
