#include "linewidth/linalg.hpp"

#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "linewidth/errors.hpp"

namespace linewidth {

namespace {

constexpr double kFirstJitter = 1e-10;
constexpr double kLastJitter = 1e-4;

// Relative jitter levels to try: 0, 1e-10, 1e-9, ..., 1e-4.
std::vector<double> jitter_schedule() {
  std::vector<double> levels{0.0};
  for (double j = kFirstJitter; j <= kLastJitter * 1.0000001; j *= 10.0) levels.push_back(j);
  return levels;
}

[[noreturn]] void fail(const char* what, std::size_t n, double jitter) {
  std::ostringstream msg;
  msg << what << ": " << n << "x" << n << " factorization failed with jitter " << jitter;
  throw IllConditionedError(msg.str(), jitter);
}

// Innovations of the Durbin-Levinson recursion. Returns nullopt if some
// prediction-error variance is not positive.
std::optional<ToeplitzSolve> durbin_levinson(std::span<const double> t, double diag_add,
                                             std::span<const double> r) {
  const std::size_t n = t.size();
  std::vector<double> phi(n, 0.0);
  std::vector<double> prev(n, 0.0);
  ToeplitzSolve out;
  double v = t[0] + diag_add;
  if (!(v > 0.0)) return std::nullopt;
  out.quadratic_form = r[0] * r[0] / v;
  out.log_determinant = std::log(v);
  for (std::size_t k = 1; k < n; ++k) {
    // Reflection coefficient for order k.
    double acc = t[k];
    for (std::size_t j = 1; j < k; ++j) acc -= phi[j] * t[k - j];
    const double kappa = acc / v;
    prev.swap(phi);
    phi[k] = kappa;
    for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - kappa * prev[k - j];
    v *= (1.0 - kappa) * (1.0 + kappa);
    if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;

    double e = r[k];
    for (std::size_t j = 1; j <= k; ++j) e -= phi[j] * r[k - j];
    out.quadratic_form += e * e / v;
    out.log_determinant += std::log(v);
  }
  return out;
}

}  // namespace

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return;
  if (a.isZero(0.0)) {
    lower = Eigen::MatrixXd::Zero(n, n);
    return;
  }
  const double scale = std::abs(a.diagonal().mean());
  for (double level : jitter_schedule()) {
    jitter = level * scale;
    Eigen::MatrixXd work = a;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      lower = llt.matrixL();
      return;
    }
  }
  fail("cholesky", static_cast<std::size_t>(n), jitter);
}

Eigen::VectorXd JitteredCholesky::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd JitteredCholesky::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd y = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd JitteredCholesky::solve_lower(const Eigen::MatrixXd& b) const {
  return lower.triangularView<Eigen::Lower>().solve(b);
}

double JitteredCholesky::log_determinant() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

ToeplitzSolve toeplitz_quadratic_logdet(std::span<const double> autocov,
                                        std::span<const double> residual) {
  if (autocov.size() != residual.size() || autocov.empty()) {
    throw DomainError("toeplitz solve: size mismatch");
  }
  const double scale = std::abs(autocov[0]);
  double jitter = 0.0;
  for (double level : jitter_schedule()) {
    jitter = level * scale;
    if (auto res = durbin_levinson(autocov, jitter, residual)) {
      res->jitter = jitter;
      return *res;
    }
  }
  fail("toeplitz", autocov.size(), jitter);
}

}  // namespace linewidth
