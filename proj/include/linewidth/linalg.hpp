#pragma once

#include <span>

#include <Eigen/Dense>

namespace linewidth {

/// Lower Cholesky factor of a symmetric matrix, with the diagonal jitter that
/// was needed to obtain it.
///
/// Factorization is first attempted as is. On failure a jitter of
/// 1e-10 * mean(diag) is added and escalated by x10 up to 1e-4 * mean(diag);
/// past that IllConditionedError is thrown carrying the last jitter tried.
/// An all-zero matrix factors to an all-zero L.
struct JitteredCholesky {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  explicit JitteredCholesky(const Eigen::MatrixXd& a);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  /// L^{-1} B
  Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& b) const;
  double log_determinant() const;
};

/// Result of factorizing a symmetric positive-definite Toeplitz matrix with
/// the Durbin-Levinson recursion applied to one right-hand side.
struct ToeplitzSolve {
  double quadratic_form = 0.0;  ///< r^T T^{-1} r
  double log_determinant = 0.0;
  double jitter = 0.0;
};

/// `autocov` is the first column of T. Same jitter policy as
/// JitteredCholesky; non-positive innovation variance counts as a failure.
/// O(n^2) time, O(n) memory.
ToeplitzSolve toeplitz_quadratic_logdet(std::span<const double> autocov,
                                        std::span<const double> residual);

}  // namespace linewidth
