#include "linewidth/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "linewidth/errors.hpp"

namespace linewidth::mcmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  Eigen::VectorXd theta;
  double log_target;
};

// Delayed-rejection acceptance probability for the path x = pts[0], y_1, ...,
// y_k = pts[k] (Tierney & Mira; Haario et al. 2006). `factors[i]` is the
// Cholesky factor of the stage i+1 proposal.
class DelayedRejection {
 public:
  explicit DelayedRejection(const std::vector<Eigen::MatrixXd>& factors) : factors_(factors) {}

  double alpha(const std::vector<const Point*>& pts) const {
    const std::size_t stage = pts.size() - 1;
    if (!std::isfinite(pts.back()->log_target)) return 0.0;
    double forward = 1.0;
    double backward = 1.0;
    for (std::size_t k = 1; k < stage; ++k) {
      forward *= 1.0 - alpha({pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(k) + 1});
      std::vector<const Point*> rev;
      for (std::size_t i = 0; i <= k; ++i) rev.push_back(pts[stage - i]);
      backward *= 1.0 - alpha(rev);
      if (backward == 0.0) return 0.0;
    }
    if (forward == 0.0) return 0.0;
    double log_ratio = pts.back()->log_target - pts.front()->log_target;
    for (std::size_t k = 1; k < stage; ++k) log_ratio += log_q_ratio(k, pts);
    return std::min(1.0, std::exp(log_ratio) * backward / forward);
  }

 private:
  // log q_k(y_n, ..., y_{n-k}) - log q_k(x, ..., y_k) for the Gaussian random
  // walk of stage k; the normalizing constants cancel.
  double log_q_ratio(std::size_t k, const std::vector<const Point*>& pts) const {
    const std::size_t stage = pts.size() - 1;
    const auto& l = factors_[k - 1];
    const Eigen::VectorXd back = pts[stage - k]->theta - pts[stage]->theta;
    const Eigen::VectorXd fwd = pts[k]->theta - pts[0]->theta;
    const Eigen::VectorXd zb = l.triangularView<Eigen::Lower>().solve(back);
    const Eigen::VectorXd zf = l.triangularView<Eigen::Lower>().solve(fwd);
    return -0.5 * (zb.squaredNorm() - zf.squaredNorm());
  }

  const std::vector<Eigen::MatrixXd>& factors_;
};

// Welford running mean and scatter matrix.
class RunningCovariance {
 public:
  explicit RunningCovariance(Eigen::Index d) : mean_(Eigen::VectorXd::Zero(d)), scatter_(Eigen::MatrixXd::Zero(d, d)) {}

  void add(const Eigen::VectorXd& x) {
    ++n_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    scatter_ += delta * (x - mean_).transpose();
  }

  std::size_t count() const { return n_; }
  Eigen::MatrixXd covariance() const { return scatter_ / static_cast<double>(n_ - 1); }

 private:
  std::size_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd scatter_;
};

}  // namespace

void PriorSpec::validate() const {
  if (!names.empty() && names.size() != bounds.size()) {
    throw UsageError("prior: names and bounds differ in length");
  }
  for (const auto& b : bounds) {
    if (!(b.lower < b.upper)) throw UsageError("prior: lower bound must be below upper bound");
  }
}

double log_prior(std::span<const double> theta, const PriorSpec& prior) {
  if (theta.size() != prior.dimension()) throw UsageError("log_prior: dimension mismatch");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!prior.bounds[i].contains(theta[i])) return -kInf;
  }
  return 0.0;
}

PriorSpec stage1_prior(double grid_span) {
  return {{"alpha", "sigma_s", "phi", "sigma_eps"},
          {{0.0, kInf}, {0.0, kInf}, {0.0, 2.0 * grid_span}, {0.0, kInf}}};
}

PriorSpec stage2_prior(double max_frequency, double max_magnitude) {
  return {{"beta0", "beta1", "sigma_c", "lambda", "sigma_z"},
          {{0.0, 10.0 * max_magnitude}, {-kInf, kInf}, {0.0, kInf}, {0.0, 3.0 * max_frequency},
           {0.0, kInf}}};
}

void DramConfig::validate(std::size_t dimension) const {
  if (chain_length < 2) throw UsageError("dram: chain length must be >= 2");
  if (burn_in >= chain_length) throw UsageError("dram: burn-in must be below chain length");
  if (dr_stages < 1) throw UsageError("dram: need at least one proposal stage");
  if (!(dr_scale > 0.0)) throw UsageError("dram: dr_scale must be > 0");
  if (adapt && adaptation_interval == 0) throw UsageError("dram: adaptation interval must be > 0");
  const auto d = static_cast<Eigen::Index>(dimension);
  if (initial_covariance.rows() != d || initial_covariance.cols() != d) {
    throw UsageError("dram: proposal covariance has the wrong shape");
  }
  if (!initial_covariance.isApprox(initial_covariance.transpose())) {
    throw UsageError("dram: proposal covariance is not symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(initial_covariance).info() != Eigen::Success) {
    throw UsageError("dram: proposal covariance is not positive definite");
  }
}

std::vector<double> Chain::row(std::size_t i) const {
  const auto r = samples.row(static_cast<Eigen::Index>(i));
  return {r.begin(), r.end()};
}

double Chain::acceptance_rate() const {
  std::size_t acc = 0;
  for (auto a : stage_accepts) acc += a;
  return size() > 1 ? static_cast<double>(acc) / static_cast<double>(size() - 1) : 0.0;
}

Chain dram_run(const LogTarget& log_target, const DramConfig& config,
               std::span<const double> init) {
  const std::size_t d = init.size();
  config.validate(d);
  const auto di = static_cast<Eigen::Index>(d);

  Point current{Eigen::Map<const Eigen::VectorXd>(init.data(), di), 0.0};
  current.log_target = log_target(init);
  if (!std::isfinite(current.log_target)) {
    throw UsageError("dram: log target is not finite at the initial point");
  }

  std::vector<Eigen::MatrixXd> factors(config.dr_stages);
  auto set_factors = [&](const Eigen::MatrixXd& l) {
    factors[0] = l;
    for (std::size_t s = 1; s < factors.size(); ++s) factors[s] = factors[s - 1] * config.dr_scale;
  };
  set_factors(Eigen::LLT<Eigen::MatrixXd>(config.initial_covariance).matrixL());
  Eigen::MatrixXd proposal_cov = config.initial_covariance;
  const DelayedRejection dr(factors);

  Chain chain;
  chain.burn_in = config.burn_in;
  chain.samples.resize(static_cast<Eigen::Index>(config.chain_length), di);
  chain.log_posterior.resize(config.chain_length);
  chain.stage_proposals.assign(config.dr_stages, 0);
  chain.stage_accepts.assign(config.dr_stages, 0);

  Rng rng(config.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  RunningCovariance history(di);
  const double adapt_scale = 2.4 * 2.4 / static_cast<double>(d);

  chain.samples.row(0) = current.theta.transpose();
  chain.log_posterior[0] = current.log_target;
  history.add(current.theta);

  std::vector<Point> tried;
  tried.reserve(config.dr_stages);
  for (std::size_t it = 1; it < config.chain_length; ++it) {
    tried.clear();
    for (std::size_t stage = 0; stage < config.dr_stages; ++stage) {
      Eigen::VectorXd z(di);
      for (Eigen::Index i = 0; i < di; ++i) z(i) = normal(rng);
      const double u = uniform(rng);
      Point y{current.theta + factors[stage] * z, 0.0};
      y.log_target = log_target(std::span<const double>(y.theta.data(), d));
      if (std::isnan(y.log_target)) y.log_target = -kInf;
      tried.push_back(std::move(y));
      ++chain.stage_proposals[stage];

      std::vector<const Point*> path{&current};
      for (const auto& p : tried) path.push_back(&p);
      if (u < dr.alpha(path)) {
        current = tried.back();
        ++chain.stage_accepts[stage];
        break;
      }
    }
    chain.samples.row(static_cast<Eigen::Index>(it)) = current.theta.transpose();
    chain.log_posterior[it] = current.log_target;
    history.add(current.theta);

    const std::size_t seen = it + 1;
    if (config.adapt && seen >= config.adaptation_start &&
        (seen - config.adaptation_start) % config.adaptation_interval == 0) {
      Eigen::MatrixXd cov = history.covariance();
      const double eps = 1e-10 * cov.trace() / static_cast<double>(d);
      cov.diagonal().array() += eps;
      cov *= adapt_scale;
      Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success && cov.allFinite()) {
        proposal_cov = cov;
        set_factors(llt.matrixL());
      }
    }
  }
  chain.final_covariance = proposal_cov;
  return chain;
}

std::vector<std::size_t> select_indices(const Chain& chain, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw UsageError("select: count must be >= 1");
  if (chain.burn_in >= chain.size()) throw UsageError("select: no post-burn-in samples");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(chain.burn_in, chain.size() - 1);
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = pick(rng);
  return out;
}

std::vector<std::vector<double>> thin_and_select(const Chain& chain, std::size_t count,
                                                 std::uint64_t seed) {
  std::vector<std::vector<double>> out;
  for (std::size_t i : select_indices(chain, count, seed)) out.push_back(chain.row(i));
  return out;
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return static_cast<double>(n);

  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mean) * (x[i + lag] - mean);
    return s / (static_cast<double>(n) * c0);
  };
  // Geyer's initial positive sequence.
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / std::max(tau, 1.0 / static_cast<double>(n));
}

double min_effective_sample_size(const Chain& chain) {
  double best = std::numeric_limits<double>::infinity();
  const auto start = static_cast<Eigen::Index>(chain.burn_in);
  const Eigen::Index len = chain.samples.rows() - start;
  for (Eigen::Index c = 0; c < chain.samples.cols(); ++c) {
    const Eigen::VectorXd col = chain.samples.col(c).segment(start, len);
    best = std::min(best, effective_sample_size({col.data(), static_cast<std::size_t>(len)}));
  }
  return best;
}

Eigen::MatrixXd default_proposal(std::span<const double> init) {
  Eigen::VectorXd sd(static_cast<Eigen::Index>(init.size()));
  for (std::size_t i = 0; i < init.size(); ++i) sd(static_cast<Eigen::Index>(i)) = 0.1 * std::abs(init[i]) + 1e-8;
  return sd.array().square().matrix().asDiagonal();
}

void write_chain(std::ostream& out, const Chain& chain) {
  const auto prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "iteration";
  for (std::size_t c = 0; c < chain.dimension(); ++c) {
    out << "\t" << (c < chain.names.size() ? chain.names[c] : "theta" + std::to_string(c));
  }
  out << "\tlog_posterior\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out << i;
    for (Eigen::Index c = 0; c < chain.samples.cols(); ++c) {
      out << "\t" << chain.samples(static_cast<Eigen::Index>(i), c);
    }
    out << "\t" << chain.log_posterior[i] << "\n";
  }
  out.precision(prec);
}

}  // namespace linewidth::mcmc
