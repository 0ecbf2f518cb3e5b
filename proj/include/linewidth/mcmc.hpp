#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace linewidth::mcmc {

using Rng = std::mt19937_64;

/// One open interval of a box prior; bounds may be infinite.
struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > lower && x < upper; }
};

/// Independent (improper) uniform priors, one interval per parameter.
struct PriorSpec {
  std::vector<std::string> names;
  std::vector<Interval> bounds;

  std::size_t dimension() const { return bounds.size(); }
  void validate() const;
};

/// 0 inside the box, -inf outside.
double log_prior(std::span<const double> theta, const PriorSpec& prior);

/// alpha, sigma_s, sigma_eps in (0, inf); phi in (0, 2 * grid span).
PriorSpec stage1_prior(double grid_span);

/// beta0 in (0, 10 max Z), beta1 free, sigma_c and sigma_z in (0, inf),
/// lambda in (0, 3 * largest retained frequency).
PriorSpec stage2_prior(double max_frequency, double max_magnitude);

struct DramConfig {
  std::size_t chain_length = 10000;
  std::size_t burn_in = 5000;
  /// Proposal attempts per iteration; 1 is plain random-walk Metropolis.
  std::size_t dr_stages = 3;
  /// Multiplies the proposal Cholesky factor at every further stage.
  double dr_scale = 0.2;
  Eigen::MatrixXd initial_covariance;
  bool adapt = true;
  std::size_t adaptation_start = 1000;
  std::size_t adaptation_interval = 100;
  std::uint64_t seed = 0;

  void validate(std::size_t dimension) const;
};

struct Chain {
  Eigen::MatrixXd samples;  ///< chain_length x d, row i is iteration i
  std::vector<double> log_posterior;
  std::size_t burn_in = 0;
  std::vector<std::size_t> stage_proposals;  ///< attempts reaching each stage
  std::vector<std::size_t> stage_accepts;
  Eigen::MatrixXd final_covariance;
  std::vector<std::string> names;

  std::size_t size() const { return log_posterior.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(samples.cols()); }
  std::vector<double> row(std::size_t i) const;
  double acceptance_rate() const;
};

using LogTarget = std::function<double(std::span<const double>)>;

/// Delayed-rejection adaptive Metropolis. Each iteration draws, per stage,
/// d standard normals and then one uniform from a generator seeded with
/// `config.seed`.
Chain dram_run(const LogTarget& log_target, const DramConfig& config,
               std::span<const double> init);

/// Indices (into the chain) of `count` uniform draws with replacement from
/// the post-burn-in part.
std::vector<std::size_t> select_indices(const Chain& chain, std::size_t count, std::uint64_t seed);

std::vector<std::vector<double>> thin_and_select(const Chain& chain, std::size_t count,
                                                 std::uint64_t seed);

/// Integrated-autocorrelation effective sample size, truncated at the first
/// non-positive pair of autocorrelations.
double effective_sample_size(std::span<const double> series);

/// Smallest per-parameter effective sample size over the post-burn-in chain.
double min_effective_sample_size(const Chain& chain);

/// Diagonal (0.1 |x_i| + 1e-8)^2.
Eigen::MatrixXd default_proposal(std::span<const double> init);

/// Header line then one row per iteration: index, parameters, log posterior.
void write_chain(std::ostream& out, const Chain& chain);

}  // namespace linewidth::mcmc
