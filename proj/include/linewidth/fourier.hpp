#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "linewidth/gp.hpp"

namespace linewidth::fourier {

/// Magnitudes of the discrete Fourier transform, scaled by the grid spacing,
/// on the frequency grid xi_k = k / (N dnu) in cycles per cm^-1.
struct MagnitudeSpectrum {
  std::vector<double> frequencies;
  std::vector<double> magnitudes;
};

MagnitudeSpectrum fft_magnitude(std::span<const double> values, double delta_nu);

/// Checks the grid is uniform before transforming.
MagnitudeSpectrum fft_magnitude(std::span<const double> grid, std::span<const double> values);

/// Stacked truncated FFT magnitudes of J realizations: block j holds the
/// first P bins of realization j.
struct FourierDataset {
  std::vector<double> magnitudes;
  std::vector<double> frequencies;
  std::size_t realizations = 0;
  std::size_t truncation = 0;
  std::size_t source_length = 0;
  double delta_nu = 0.0;

  /// Frequencies of one block, xi_0 = 0 ... xi_{P-1}.
  std::vector<double> grid() const;
  /// P x J view of the magnitudes.
  Eigen::MatrixXd as_matrix() const;
  double max_magnitude() const;
  double max_frequency() const;
};

FourierDataset build_dataset(const std::vector<std::vector<double>>& realizations,
                             double delta_nu, std::size_t truncation);

/// Columns: realization, bin, xi, magnitude.
void write_dataset(std::ostream& out, const FourierDataset& dataset);

/// Mean Lorentzian half width implied by the value and slope of the Fourier
/// magnitude at the origin: -Z'/(2 pi Z). nullopt if Z <= 0.
std::optional<double> gamma_estimate_from_point(double value, double derivative);

struct GammaCurve {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t excluded = 0;  ///< pointwise draws dropped for Z <= 0
};

/// Pointwise mean and central 95% interval of -Z'(xi) / (2 pi Z(xi)) over
/// joint draws evaluated on `grid`.
GammaCurve gamma_curve(std::span<const double> grid, std::span<const gp::JointDraw> draws);

/// Columns: xi, mean, lower, upper.
void write_gamma_curve(std::ostream& out, const GammaCurve& curve);

}  // namespace linewidth::fourier
