#include "linewidth/gp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "linewidth/errors.hpp"

namespace linewidth::gp {

namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

bool is_uniform(std::span<const double> x) {
  if (x.size() < 3) return false;
  const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(step > 0.0)) return false;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (std::abs((x[i] - x[i - 1]) - step) > 1e-9 * step) return false;
  }
  return true;
}

Eigen::VectorXd residual(std::span<const double> x, std::span<const double> y,
                         const MeanFunction& mean) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) r(static_cast<Eigen::Index>(i)) = y[i] - mean_value(mean, x[i]);
  return r;
}

void check_kernel(const SquaredExponential& k, double noise_sd) {
  if (!(k.signal_sd > 0.0) || !(k.length_scale > 0.0) || !(noise_sd >= 0.0)) {
    throw DomainError("gp: signal sd and length scale must be > 0, noise sd >= 0");
  }
}

// Prior covariance of [f(q); f'(q)] and the cross covariance between the
// training inputs and [f(q); f'(q)] (n x 2m).
Eigen::MatrixXd joint_prior(std::span<const double> q, const SquaredExponential& k) {
  const Eigen::Index m = static_cast<Eigen::Index>(q.size());
  const double var = k.signal_sd * k.signal_sd;
  Eigen::MatrixXd c(2 * m, 2 * m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto d = derivative_kernels(q[a], q[b], var, k.length_scale);
      c(a, b) = d.c00;
      c(a, m + b) = d.c01;
      c(m + a, b) = d.c10;
      c(m + a, m + b) = d.c11;
    }
  }
  return c;
}

Eigen::MatrixXd joint_cross(std::span<const double> x, std::span<const double> q,
                            const SquaredExponential& k) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index m = static_cast<Eigen::Index>(q.size());
  const double var = k.signal_sd * k.signal_sd;
  Eigen::MatrixXd c(n, 2 * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index a = 0; a < m; ++a) {
      // Covariance of f(x_i) with f(q_a) and with f'(q_a).
      const auto d = derivative_kernels(q[a], x[i], var, k.length_scale);
      c(i, a) = d.c00;
      c(i, m + a) = d.c10;
    }
  }
  return c;
}

JointPrediction assemble_joint(std::span<const double> q, const MeanFunction& mean,
                               const Eigen::MatrixXd& prior, const Eigen::VectorXd& shift,
                               const Eigen::MatrixXd& reduction) {
  const Eigen::Index m = static_cast<Eigen::Index>(q.size());
  JointPrediction out;
  out.mean_value.resize(m);
  out.mean_derivative.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    out.mean_value(a) = mean_value(mean, q[a]) + shift(a);
    out.mean_derivative(a) = mean_derivative(mean, q[a]) + shift(m + a);
  }
  out.covariance = prior - reduction;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

}  // namespace

double sq_exp_kernel(double xi, double xj, double signal_var, double length_scale) {
  const double d = (xi - xj) / length_scale;
  return signal_var * std::exp(-0.5 * d * d);
}

DerivativeCovariances derivative_kernels(double xi, double xj, double signal_var,
                                         double length_scale) {
  const double diff = xi - xj;
  const double l2 = length_scale * length_scale;
  const double k = signal_var * std::exp(-0.5 * diff * diff / l2);
  return {k, k * diff / l2, -k * diff / l2, k * (l2 - diff * diff) / (l2 * l2)};
}

double ExponentialMean::value(double x) const { return beta0 * std::exp(beta1 * x); }
double ExponentialMean::derivative(double x) const { return beta0 * beta1 * std::exp(beta1 * x); }

double mean_value(const MeanFunction& mean, double x) {
  return std::visit([x](const auto& m) { return m.value(x); }, mean);
}

double mean_derivative(const MeanFunction& mean, double x) {
  return std::visit([x](const auto& m) { return m.derivative(x); }, mean);
}

Stage1Hyper Stage1Hyper::from(std::span<const double> theta) {
  if (theta.size() != dimension) throw UsageError("stage-1 hyperparameters need 4 values");
  return {theta[0], theta[1], theta[2], theta[3]};
}

void Stage1Hyper::validate() const {
  if (!(sigma_s > 0.0 && phi > 0.0 && sigma_eps > 0.0 && alpha >= 0.0)) {
    throw DomainError("stage-1 hyperparameters out of range");
  }
}

Stage2Hyper Stage2Hyper::from(std::span<const double> theta) {
  if (theta.size() != dimension) throw UsageError("stage-2 hyperparameters need 5 values");
  return {theta[0], theta[1], theta[2], theta[3], theta[4]};
}

void Stage2Hyper::validate() const {
  if (!(sigma_c > 0.0 && lambda > 0.0 && sigma_z > 0.0 && beta0 >= 0.0) ||
      !std::isfinite(beta1)) {
    throw DomainError("stage-2 hyperparameters out of range");
  }
}

Eigen::MatrixXd kernel_matrix(std::span<const double> xs, std::span<const double> ys,
                              const SquaredExponential& kernel) {
  Eigen::MatrixXd k(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) k(i, j) = kernel(xs[i], ys[j]);
  }
  return k;
}

double log_likelihood_dense(std::span<const double> inputs, std::span<const double> targets,
                            const SquaredExponential& kernel, const MeanFunction& mean,
                            double noise_sd) {
  if (inputs.size() != targets.size()) throw UsageError("log_likelihood: size mismatch");
  check_kernel(kernel, noise_sd);
  Eigen::MatrixXd k = kernel_matrix(inputs, inputs, kernel);
  k.diagonal().array() += noise_sd * noise_sd;
  const JitteredCholesky chol(k);
  const Eigen::VectorXd z = chol.solve_lower(residual(inputs, targets, mean));
  const double n = static_cast<double>(inputs.size());
  return -0.5 * z.squaredNorm() - 0.5 * chol.log_determinant() - 0.5 * n * kLogTwoPi;
}

double log_likelihood(std::span<const double> inputs, std::span<const double> targets,
                      const SquaredExponential& kernel, const MeanFunction& mean,
                      double noise_sd) {
  if (inputs.size() != targets.size()) throw UsageError("log_likelihood: size mismatch");
  if (!is_uniform(inputs)) return log_likelihood_dense(inputs, targets, kernel, mean, noise_sd);
  check_kernel(kernel, noise_sd);
  std::vector<double> autocov(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) autocov[i] = kernel(inputs[0], inputs[i]);
  autocov[0] += noise_sd * noise_sd;
  const Eigen::VectorXd r = residual(inputs, targets, mean);
  const auto t = toeplitz_quadratic_logdet(autocov, std::span<const double>(r.data(), r.size()));
  const double n = static_cast<double>(inputs.size());
  return -0.5 * t.quadratic_form - 0.5 * t.log_determinant - 0.5 * n * kLogTwoPi;
}

GpFit::GpFit(std::vector<double> inputs, std::vector<double> targets, SquaredExponential kernel,
             MeanFunction mean, double noise_sd)
    : inputs_(std::move(inputs)),
      targets_(std::move(targets)),
      kernel_(kernel),
      mean_(mean),
      noise_sd_(noise_sd),
      chol_([&] {
        if (inputs_.size() != targets_.size()) throw UsageError("GpFit: size mismatch");
        check_kernel(kernel_, noise_sd_);
        Eigen::MatrixXd k = kernel_matrix(inputs_, inputs_, kernel_);
        k.diagonal().array() += noise_sd_ * noise_sd_;
        return JitteredCholesky(k);
      }()) {
  if (!inputs_.empty()) weights_ = chol_.solve(residual(inputs_, targets_, mean_));
}

double GpFit::log_likelihood() const {
  const Eigen::VectorXd r = residual(inputs_, targets_, mean_);
  const double n = static_cast<double>(inputs_.size());
  return -0.5 * r.dot(weights_) - 0.5 * chol_.log_determinant() - 0.5 * n * kLogTwoPi;
}

Prediction GpFit::predict(std::span<const double> query) const {
  const Eigen::Index m = static_cast<Eigen::Index>(query.size());
  Prediction out;
  out.covariance = kernel_matrix(query, query, kernel_);
  out.mean.resize(m);
  for (Eigen::Index a = 0; a < m; ++a) out.mean(a) = mean_value(mean_, query[a]);
  if (inputs_.empty()) return out;
  const Eigen::MatrixXd cross = kernel_matrix(inputs_, query, kernel_);
  out.mean += cross.transpose() * weights_;
  const Eigen::MatrixXd v = chol_.solve_lower(cross);
  out.covariance.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), -1.0);
  out.covariance.triangularView<Eigen::StrictlyUpper>() = out.covariance.transpose();
  return out;
}

std::vector<double> GpFit::sample_realization(std::span<const double> query, Rng& rng) const {
  const Prediction pred = predict(query);
  const JitteredCholesky chol(pred.covariance);
  const Eigen::Index m = pred.mean.size();
  std::normal_distribution<double> normal;
  Eigen::VectorXd w(m);
  Eigen::VectorXd e(m);
  for (Eigen::Index i = 0; i < m; ++i) w(i) = normal(rng);
  for (Eigen::Index i = 0; i < m; ++i) e(i) = normal(rng);
  Eigen::VectorXd out = pred.mean;
  if (m > 0) out += chol.lower * w + noise_sd_ * e;
  return {out.data(), out.data() + m};
}

JointPrediction GpFit::predict_with_derivative(std::span<const double> query) const {
  const Eigen::Index m = static_cast<Eigen::Index>(query.size());
  const Eigen::MatrixXd prior = joint_prior(query, kernel_);
  if (inputs_.empty()) {
    return assemble_joint(query, mean_, prior, Eigen::VectorXd::Zero(2 * m),
                          Eigen::MatrixXd::Zero(2 * m, 2 * m));
  }
  const Eigen::MatrixXd cross = joint_cross(inputs_, query, kernel_);
  const Eigen::MatrixXd v = chol_.solve_lower(cross);
  return assemble_joint(query, mean_, prior, cross.transpose() * weights_, v.transpose() * v);
}

ReplicatedGpFit::ReplicatedGpFit(std::vector<double> grid, const Eigen::MatrixXd& targets,
                                 SquaredExponential kernel, MeanFunction mean, double noise_sd)
    : grid_(std::move(grid)),
      replicates_(static_cast<std::size_t>(targets.cols())),
      kernel_(kernel),
      mean_(mean),
      noise_sd_(noise_sd),
      chol_([&] {
        if (static_cast<std::size_t>(targets.rows()) != grid_.size() || targets.cols() < 1) {
          throw UsageError("ReplicatedGpFit: targets must be P x J with J >= 1");
        }
        check_kernel(kernel_, noise_sd_);
        if (!(noise_sd_ > 0.0)) throw DomainError("ReplicatedGpFit: noise sd must be > 0");
        Eigen::MatrixXd a = static_cast<double>(targets.cols()) * kernel_matrix(grid_, grid_, kernel_);
        a.diagonal().array() += noise_sd_ * noise_sd_;
        return JitteredCholesky(a);
      }()) {
  const Eigen::Index p = targets.rows();
  const double j = static_cast<double>(replicates_);
  Eigen::MatrixXd r = targets;
  for (Eigen::Index i = 0; i < p; ++i) r.row(i).array() -= mean_value(mean_, grid_[i]);
  const Eigen::VectorXd rbar = r.rowwise().mean();
  const double within = (r.colwise() - rbar).squaredNorm();
  const Eigen::VectorXd solved = chol_.solve(rbar);
  weights_ = j * solved;

  // Block-diagonalize 11^T (x) K + s^2 I: the replicate mean sees J K + s^2 I,
  // the J-1 orthogonal contrasts see s^2 I.
  const double s2 = noise_sd_ * noise_sd_;
  const double quad = j * rbar.dot(solved) + within / s2;
  const double logdet = chol_.log_determinant() + (j - 1.0) * static_cast<double>(p) * std::log(s2);
  log_likelihood_ = -0.5 * quad - 0.5 * logdet - 0.5 * j * static_cast<double>(p) * kLogTwoPi;
}

JointPrediction ReplicatedGpFit::predict_with_derivative(std::span<const double> query) const {
  const Eigen::MatrixXd prior = joint_prior(query, kernel_);
  const Eigen::MatrixXd cross = joint_cross(grid_, query, kernel_);
  const Eigen::MatrixXd v = chol_.solve_lower(cross);
  return assemble_joint(query, mean_, prior, cross.transpose() * weights_,
                        static_cast<double>(replicates_) * (v.transpose() * v));
}

JointDraw sample_joint(const JointPrediction& prediction, Rng& rng) {
  const Eigen::Index m = static_cast<Eigen::Index>(prediction.size());
  const JitteredCholesky chol(prediction.covariance);
  std::normal_distribution<double> normal;
  Eigen::VectorXd r(2 * m);
  for (Eigen::Index i = 0; i < 2 * m; ++i) r(i) = normal(rng);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(2 * m);
  if (m > 0) shift = chol.lower * r;
  return {prediction.mean_value + shift.head(m), prediction.mean_derivative + shift.tail(m)};
}

}  // namespace linewidth::gp
