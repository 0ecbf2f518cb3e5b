#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "linewidth/errors.hpp"
#include "linewidth/mcmc.hpp"
#include "oracles.hpp"

using namespace linewidth;
using namespace linewidth::mcmc;
using doctest::Approx;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DramConfig config(std::size_t length, std::size_t burn, std::size_t stages, bool adapt,
                  Eigen::MatrixXd cov, std::uint64_t seed) {
  DramConfig c;
  c.chain_length = length;
  c.burn_in = burn;
  c.dr_stages = stages;
  c.adapt = adapt;
  c.initial_covariance = std::move(cov);
  c.seed = seed;
  return c;
}

std::vector<double> column(const Chain& chain, Eigen::Index c, std::size_t thin = 1) {
  std::vector<double> out;
  for (std::size_t i = chain.burn_in; i < chain.size(); i += thin) {
    out.push_back(chain.samples(static_cast<Eigen::Index>(i), c));
  }
  return out;
}

double sample_mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_var(const std::vector<double>& x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Kolmogorov-Smirnov distance to U(lo, hi).
double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

}  // namespace

TEST_CASE("single-stage non-adaptive run is plain Metropolis, bit for bit") {
  const LogTarget target = [](std::span<const double> x) {
    return -0.5 * (x[0] * x[0] + 4.0 * (x[1] - 1.0) * (x[1] - 1.0)) - (x[0] < -3.0 ? kInf : 0.0);
  };
  Eigen::Matrix2d cov;
  cov << 0.8, 0.1, 0.1, 0.5;
  const std::vector<double> init{0.5, 0.5};
  const auto chain = dram_run(target, config(3000, 100, 1, false, cov, 77), init);
  const auto ref = oracle::metropolis(target, cov, init, 3000, 77);
  CHECK(chain.samples == ref);
  CHECK(chain.stage_proposals.size() == 1);
  CHECK(chain.stage_proposals[0] == 2999);
}

TEST_CASE("delayed rejection samples a correlated gaussian") {
  const double rho = 0.8;
  const LogTarget target = [&](std::span<const double> x) {
    const double a = x[0] - 1.0, b = x[1] + 2.0;
    return -0.5 * (a * a - 2.0 * rho * a * b + b * b) / (1.0 - rho * rho);
  };
  // Deliberately oversized first-stage proposal so later stages do the work.
  const Eigen::MatrixXd cov = 25.0 * Eigen::MatrixXd::Identity(2, 2);
  for (bool adapt : {false, true}) {
    const auto chain = dram_run(target, config(200000, 20000, 3, adapt, cov, adapt ? 5 : 6),
                                std::vector<double>{0.0, 0.0});
    const auto x = column(chain, 0), y = column(chain, 1);
    const double ess = std::min(effective_sample_size(x), effective_sample_size(y));
    CHECK(std::abs(sample_mean(x) - 1.0) < 5.0 / std::sqrt(ess));
    CHECK(std::abs(sample_mean(y) + 2.0) < 5.0 / std::sqrt(ess));
    CHECK(sample_var(x) == Approx(1.0).epsilon(0.08));
    CHECK(sample_var(y) == Approx(1.0).epsilon(0.08));
    if (!adapt) {
      CHECK(chain.stage_accepts[1] > 0);
      CHECK(chain.stage_accepts[2] > 0);
    }
  }
}

TEST_CASE("uniform target on a box has uniform marginals") {
  const PriorSpec box{{"a", "b"}, {{0.0, 1.0}, {-1.0, 3.0}}};
  const LogTarget target = [&](std::span<const double> x) { return log_prior(x, box); };
  const auto chain = dram_run(target, config(120000, 2000, 2, true, Eigen::MatrixXd::Identity(2, 2), 8),
                              std::vector<double>{0.5, 1.0});
  const auto a = column(chain, 0, 20), b = column(chain, 1, 20);
  const double n = static_cast<double>(a.size());
  // 1.63 / sqrt(n) is the 1% critical value; thinning leaves some correlation.
  CHECK(ks_uniform(a, 0.0, 1.0) < 2.5 / std::sqrt(n));
  CHECK(ks_uniform(b, -1.0, 3.0) < 2.5 / std::sqrt(n));
  CHECK(std::all_of(chain.log_posterior.begin(), chain.log_posterior.end(),
                    [](double v) { return std::isfinite(v); }));
}

TEST_CASE("double well histogram matches the target density") {
  auto logp = [](double x) { return -(x * x - 1.0) * (x * x - 1.0) / 0.5; };
  const LogTarget target = [&](std::span<const double> x) { return logp(x[0]); };
  const auto chain = dram_run(target, config(300000, 10000, 3, true, 4.0 * Eigen::MatrixXd::Identity(1, 1), 9),
                              std::vector<double>{1.0});
  const auto x = column(chain, 0);
  const double lo = -2.5, hi = 2.5;
  const std::size_t bins = 50;
  const double w = (hi - lo) / bins;
  std::vector<double> hist(bins, 0.0), ref(bins, 0.0);
  for (double v : x) {
    if (v > lo && v < hi) hist[static_cast<std::size_t>((v - lo) / w)] += 1.0 / static_cast<double>(x.size());
  }
  double z = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    ref[b] = oracle::simpson([&](double t) { return std::exp(logp(t)); }, lo + b * w, lo + (b + 1) * w, 50);
    z += ref[b];
  }
  double tv = 0.0;
  for (std::size_t b = 0; b < bins; ++b) tv += 0.5 * std::abs(hist[b] - ref[b] / z);
  CHECK(tv < 0.03);
}

TEST_CASE("runs are deterministic in the seed") {
  const LogTarget target = [](std::span<const double> x) { return -0.5 * x[0] * x[0] - std::abs(x[1]); };
  const auto cov = Eigen::MatrixXd::Identity(2, 2);
  const auto a = dram_run(target, config(5000, 1000, 3, true, cov, 42), std::vector<double>{0.1, 0.2});
  const auto b = dram_run(target, config(5000, 1000, 3, true, cov, 42), std::vector<double>{0.1, 0.2});
  const auto c = dram_run(target, config(5000, 1000, 3, true, cov, 43), std::vector<double>{0.1, 0.2});
  CHECK(a.samples == b.samples);
  CHECK(a.log_posterior == b.log_posterior);
  CHECK(a.final_covariance == b.final_covariance);
  CHECK(a.samples != c.samples);
  CHECK(select_indices(a, 100, 3) == select_indices(a, 100, 3));
}

TEST_CASE("adaptation replaces the proposal covariance") {
  const LogTarget target = [](std::span<const double> x) { return -0.5 * (x[0] * x[0] / 9.0 + x[1] * x[1]); };
  const auto cov = 0.01 * Eigen::MatrixXd::Identity(2, 2);
  const auto fixed = dram_run(target, config(5000, 1000, 1, false, cov, 4), std::vector<double>{0.0, 0.0});
  CHECK(fixed.final_covariance == cov);
  const auto adapted = dram_run(target, config(20000, 1000, 1, true, cov, 4), std::vector<double>{0.0, 0.0});
  CHECK(adapted.final_covariance(0, 0) > 5.0 * adapted.final_covariance(1, 1));
  CHECK(adapted.final_covariance(0, 0) == Approx(2.88 * 9.0).epsilon(0.3));
}

TEST_CASE("selection draws uniformly from the post-burn-in part") {
  Chain chain;
  chain.samples = Eigen::MatrixXd::Zero(110, 1);
  for (int i = 0; i < 110; ++i) chain.samples(i, 0) = i;
  chain.log_posterior.assign(110, 0.0);
  chain.burn_in = 100;
  const auto idx = select_indices(chain, 100000, 1);
  std::vector<double> counts(10, 0.0);
  for (auto i : idx) {
    REQUIRE(i >= 100);
    REQUIRE(i < 110);
    counts[i - 100] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 27.9);  // 0.999 quantile, 9 degrees of freedom
  const auto rows = thin_and_select(chain, 5, 2);
  const auto again = select_indices(chain, 5, 2);
  for (std::size_t k = 0; k < 5; ++k) CHECK(rows[k][0] == static_cast<double>(again[k]));
  CHECK_THROWS_AS(select_indices(chain, 0, 1), UsageError);
  chain.burn_in = 110;
  CHECK_THROWS_AS(select_indices(chain, 1, 1), UsageError);
}

TEST_CASE("effective sample size of iid and AR(1) series") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> iid(50000), ar(50000);
  double prev = 0.0;
  for (std::size_t i = 0; i < iid.size(); ++i) {
    iid[i] = z(rng);
    prev = 0.9 * prev + z(rng);
    ar[i] = prev;
  }
  CHECK(effective_sample_size(iid) == Approx(50000.0).epsilon(0.1));
  CHECK(effective_sample_size(ar) == Approx(50000.0 / 19.0).epsilon(0.2));
}

TEST_CASE("box priors") {
  const auto p1 = stage1_prior(200.0);
  CHECK(p1.dimension() == 4);
  CHECK(log_prior(std::vector<double>{1.0, 1.0, 399.0, 0.1}, p1) == 0.0);
  CHECK(log_prior(std::vector<double>{1.0, 1.0, 401.0, 0.1}, p1) == -kInf);
  CHECK(log_prior(std::vector<double>{0.0, 1.0, 1.0, 0.1}, p1) == -kInf);
  const auto p2 = stage2_prior(0.05, 100.0);
  CHECK(log_prior(std::vector<double>{999.0, -1e6, 1.0, 0.149, 1.0}, p2) == 0.0);
  CHECK(log_prior(std::vector<double>{1001.0, 0.0, 1.0, 0.1, 1.0}, p2) == -kInf);
  CHECK(log_prior(std::vector<double>{1.0, 0.0, 1.0, 0.151, 1.0}, p2) == -kInf);
  CHECK(log_prior(std::vector<double>{1.0, 0.0, 1.0, 0.1, -1.0}, p2) == -kInf);
  CHECK_THROWS_AS(log_prior(std::vector<double>{1.0}, p2), UsageError);
  const PriorSpec bad{{}, {{1.0, 0.0}}};
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("configuration validation and bad starting points") {
  const LogTarget target = [](std::span<const double> x) { return x[0] > 0.0 ? 0.0 : -kInf; };
  const auto cov = Eigen::MatrixXd::Identity(1, 1);
  CHECK_THROWS_AS(dram_run(target, config(100, 100, 1, true, cov, 1), std::vector<double>{1.0}), UsageError);
  CHECK_THROWS_AS(dram_run(target, config(100, 10, 0, true, cov, 1), std::vector<double>{1.0}), UsageError);
  CHECK_THROWS_AS(dram_run(target, config(100, 10, 1, true, -cov, 1), std::vector<double>{1.0}), UsageError);
  CHECK_THROWS_AS(dram_run(target, config(100, 10, 1, true, cov, 1), std::vector<double>{-1.0}), UsageError);
  CHECK_THROWS_AS(dram_run(target, config(100, 10, 1, true, Eigen::MatrixXd::Identity(2, 2), 1),
                           std::vector<double>{1.0}),
                  UsageError);
}

TEST_CASE("default proposal and chain output") {
  const auto p = default_proposal(std::vector<double>{10.0, 0.0});
  CHECK(p(0, 0) == Approx(1.0));
  CHECK(p(1, 1) > 0.0);
  CHECK(p(0, 1) == 0.0);

  const LogTarget target = [](std::span<const double> x) { return -x[0] * x[0]; };
  auto chain = dram_run(target, config(10, 2, 1, false, Eigen::MatrixXd::Identity(1, 1), 1), std::vector<double>{0.0});
  chain.names = {"mu"};
  std::ostringstream out;
  write_chain(out, chain);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iteration\tmu\tlog_posterior");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
  CHECK(chain.acceptance_rate() >= 0.0);
  CHECK(chain.acceptance_rate() <= 1.0);
}
