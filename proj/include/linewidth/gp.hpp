#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "linewidth/linalg.hpp"

namespace linewidth::gp {

using Rng = std::mt19937_64;

/// sigma^2 exp(-(xi - xj)^2 / (2 l^2))
double sq_exp_kernel(double xi, double xj, double signal_var, double length_scale);

/// Covariances between a process value/derivative at xi and value/derivative
/// at xj: c00 = k, c01 = dk/dxj, c10 = dk/dxi, c11 = d2k/(dxi dxj).
struct DerivativeCovariances {
  double c00;
  double c01;
  double c10;
  double c11;
};

DerivativeCovariances derivative_kernels(double xi, double xj, double signal_var,
                                         double length_scale);

struct SquaredExponential {
  double signal_sd = 1.0;
  double length_scale = 1.0;

  double operator()(double xi, double xj) const {
    return sq_exp_kernel(xi, xj, signal_sd * signal_sd, length_scale);
  }
};

struct ConstantMean {
  double alpha = 0.0;

  double value(double) const { return alpha; }
  double derivative(double) const { return 0.0; }
};

/// beta0 * exp(beta1 * x)
struct ExponentialMean {
  double beta0 = 1.0;
  double beta1 = 0.0;

  double value(double x) const;
  double derivative(double x) const;
};

using MeanFunction = std::variant<ConstantMean, ExponentialMean>;

double mean_value(const MeanFunction& mean, double x);
double mean_derivative(const MeanFunction& mean, double x);

/// Spectrum-domain model: constant mean, squared-exponential kernel.
struct Stage1Hyper {
  double alpha = 0.0;
  double sigma_s = 1.0;
  double phi = 1.0;
  double sigma_eps = 1.0;

  static constexpr std::size_t dimension = 4;
  static Stage1Hyper from(std::span<const double> theta);
  std::vector<double> to_vector() const { return {alpha, sigma_s, phi, sigma_eps}; }
  void validate() const;

  SquaredExponential kernel() const { return {sigma_s, phi}; }
  MeanFunction mean() const { return ConstantMean{alpha}; }
  double noise() const { return sigma_eps; }
};

/// Fourier-domain model: exponential mean, squared-exponential kernel.
struct Stage2Hyper {
  double beta0 = 1.0;
  double beta1 = 0.0;
  double sigma_c = 1.0;
  double lambda = 1.0;
  double sigma_z = 1.0;

  static constexpr std::size_t dimension = 5;
  static Stage2Hyper from(std::span<const double> theta);
  std::vector<double> to_vector() const { return {beta0, beta1, sigma_c, lambda, sigma_z}; }
  void validate() const;

  SquaredExponential kernel() const { return {sigma_c, lambda}; }
  MeanFunction mean() const { return ExponentialMean{beta0, beta1}; }
  double noise() const { return sigma_z; }
};

Eigen::MatrixXd kernel_matrix(std::span<const double> xs, std::span<const double> ys,
                              const SquaredExponential& kernel);

/// Gaussian log density of `targets` under GP(mean, kernel + noise^2 I).
/// Uniformly spaced inputs use the O(n^2) Toeplitz recursion, anything else a
/// dense Cholesky factorization.
double log_likelihood(std::span<const double> inputs, std::span<const double> targets,
                      const SquaredExponential& kernel, const MeanFunction& mean,
                      double noise_sd);

template <class Hyper>
double log_likelihood(std::span<const double> inputs, std::span<const double> targets,
                      const Hyper& hyper) {
  return log_likelihood(inputs, targets, hyper.kernel(), hyper.mean(), hyper.noise());
}

/// Dense-route log likelihood, regardless of input spacing.
double log_likelihood_dense(std::span<const double> inputs, std::span<const double> targets,
                            const SquaredExponential& kernel, const MeanFunction& mean,
                            double noise_sd);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Predictive value and first derivative at the query points. The covariance
/// stacks the value block first, then the derivative block.
struct JointPrediction {
  Eigen::VectorXd mean_value;
  Eigen::VectorXd mean_derivative;
  Eigen::MatrixXd covariance;

  std::size_t size() const { return static_cast<std::size_t>(mean_value.size()); }
};

/// Exact GP conditioned on a training set. Immutable once built.
class GpFit {
 public:
  GpFit(std::vector<double> inputs, std::vector<double> targets, SquaredExponential kernel,
        MeanFunction mean, double noise_sd);

  template <class Hyper>
  GpFit(std::vector<double> inputs, std::vector<double> targets, const Hyper& hyper)
      : GpFit(std::move(inputs), std::move(targets), hyper.kernel(), hyper.mean(),
              hyper.noise()) {}

  double log_likelihood() const;
  Prediction predict(std::span<const double> query) const;

  /// mu* + L w + noise e, L the (jittered) Cholesky factor of the predictive
  /// covariance.
  std::vector<double> sample_realization(std::span<const double> query, Rng& rng) const;

  JointPrediction predict_with_derivative(std::span<const double> query) const;

  std::span<const double> inputs() const { return inputs_; }
  std::span<const double> targets() const { return targets_; }
  const SquaredExponential& kernel() const { return kernel_; }
  const MeanFunction& mean() const { return mean_; }
  double noise_sd() const { return noise_sd_; }
  double jitter() const { return chol_.jitter; }

 private:
  std::vector<double> inputs_;
  std::vector<double> targets_;
  SquaredExponential kernel_;
  MeanFunction mean_;
  double noise_sd_;
  JitteredCholesky chol_;
  Eigen::VectorXd weights_;  // (K + noise^2 I)^{-1} (y - m(x))
};

/// GP conditioned on J replicate series observed on one shared grid of P
/// points; equivalent to a GpFit on the stacked inputs but factorizes only
/// the P x P matrix J K + noise^2 I.
class ReplicatedGpFit {
 public:
  /// `targets` is P x J, column j being replicate j.
  ReplicatedGpFit(std::vector<double> grid, const Eigen::MatrixXd& targets,
                  SquaredExponential kernel, MeanFunction mean, double noise_sd);

  template <class Hyper>
  ReplicatedGpFit(std::vector<double> grid, const Eigen::MatrixXd& targets, const Hyper& hyper)
      : ReplicatedGpFit(std::move(grid), targets, hyper.kernel(), hyper.mean(), hyper.noise()) {}

  double log_likelihood() const { return log_likelihood_; }
  JointPrediction predict_with_derivative(std::span<const double> query) const;

  std::size_t replicates() const { return replicates_; }

 private:
  std::vector<double> grid_;
  std::size_t replicates_;
  SquaredExponential kernel_;
  MeanFunction mean_;
  double noise_sd_;
  JitteredCholesky chol_;
  Eigen::VectorXd weights_;  // J (J K + noise^2 I)^{-1} mean residual
  double log_likelihood_ = 0.0;
};

/// Mean plus Q r with Q the lower Cholesky factor of the joint covariance.
struct JointDraw {
  Eigen::VectorXd values;
  Eigen::VectorXd derivatives;
};

JointDraw sample_joint(const JointPrediction& prediction, Rng& rng);

}  // namespace linewidth::gp
