#include "linewidth/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "linewidth/errors.hpp"
#include "linewidth/gp.hpp"
#include "linewidth/stats.hpp"

namespace linewidth::pipeline {

namespace {

enum Stream : std::uint64_t {
  kStage1Chain = 1,
  kStage1Select = 2,
  kRealization = 3,
  kStage2Chain = 4,
  kStage2Select = 5,
  kGammaDraw = 6,
  kCurveSelect = 7,
  kCurveDraw = 8,
};

double sample_sd(std::span<const double> x) {
  const double m = stats::mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() > 1 ? x.size() - 1 : 1));
}

template <class Fn>
mcmc::LogTarget guarded(const char* stage, Fn&& fn) {
  auto evaluations = std::make_shared<std::size_t>(0);
  return [stage, evaluations, fn = std::forward<Fn>(fn)](std::span<const double> theta) {
    ++*evaluations;
    try {
      return fn(theta);
    } catch (const IllConditionedError& e) {
      throw IllConditionedError(std::string(stage) + ", log-target evaluation " +
                                    std::to_string(*evaluations) + ": " + e.what(),
                                e.jitter());
    }
  };
}

}  // namespace

mcmc::DramConfig ChainSettings::dram(const Eigen::MatrixXd& proposal, std::uint64_t seed) const {
  mcmc::DramConfig c;
  c.chain_length = chain_length;
  c.burn_in = burn_in;
  c.dr_stages = dr_stages;
  c.dr_scale = dr_scale;
  c.initial_covariance = proposal;
  c.adapt = adapt;
  c.adaptation_start = adaptation_start;
  c.adaptation_interval = adaptation_interval;
  c.seed = seed;
  return c;
}

void PipelineConfig::validate() const {
  if (realizations < 2) throw UsageError("config: realizations (J) must be >= 2");
  if (gamma_samples < 100) throw UsageError("config: gamma samples (J_z) must be >= 100");
  if (truncation < 4) throw UsageError("config: truncation (P) must be >= 4");
  for (const auto* s : {&stage1, &stage2}) {
    if (s->burn_in >= s->chain_length) throw UsageError("config: burn-in must be below chain length");
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<double> stage1_initial(const Spectrum& s) {
  const double sd = sample_sd(s.intensities);
  double alpha = stats::mean(s.intensities);
  if (!(alpha > 0.0)) alpha = 1e-3 * std::max(sd, 1e-12);
  const double scale = sd > 0.0 ? sd : 1.0;
  return {alpha, scale, s.span() / 10.0, 0.05 * scale};
}

std::vector<double> stage2_initial(const fourier::FourierDataset& ds) {
  const Eigen::MatrixXd z = ds.as_matrix();
  const Eigen::VectorXd mean = z.rowwise().mean();
  const auto grid = ds.grid();

  // Least-squares slope of log mean magnitude against frequency, first bins.
  const std::size_t k = std::min<std::size_t>(5, ds.truncation);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double x = grid[i];
    const double y = std::log(std::max(mean(static_cast<Eigen::Index>(i)), 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double kn = static_cast<double>(k);
  const double slope = (kn * sxy - sx * sy) / (kn * sxx - sx * sx);

  const double zmax = ds.max_magnitude();
  const double beta0 = std::clamp(mean(0), 1e-6 * zmax, 9.9 * zmax);
  const double sd = std::max(sample_sd(ds.magnitudes), 1e-12 * zmax);
  return {beta0, slope, sd, ds.max_frequency() / 3.0, 0.01 * zmax};
}

Stage1Result run_stage1(const Spectrum& input, const PipelineConfig& config) {
  config.validate();
  Stage1Result out;
  out.spectrum = config.region ? input.crop(config.region->lo, config.region->hi) : input;
  out.spectrum.validate();
  const auto& grid = out.spectrum.grid;
  const auto& values = out.spectrum.intensities;

  const mcmc::PriorSpec prior = mcmc::stage1_prior(out.spectrum.span());
  auto target = guarded("stage 1", [&](std::span<const double> theta) {
    if (!std::isfinite(mcmc::log_prior(theta, prior))) return -std::numeric_limits<double>::infinity();
    return gp::log_likelihood(grid, values, gp::Stage1Hyper::from(theta));
  });

  const auto init = stage1_initial(out.spectrum);
  out.chain = mcmc::dram_run(
      target, config.stage1.dram(mcmc::default_proposal(init), derive_seed(config.seed, kStage1Chain)),
      init);
  out.chain.names = prior.names;

  out.draw_indices = mcmc::select_indices(out.chain, config.realizations,
                                          derive_seed(config.seed, kStage1Select));
  out.realizations.reserve(out.draw_indices.size());
  for (std::size_t j = 0; j < out.draw_indices.size(); ++j) {
    const auto hyper = gp::Stage1Hyper::from(out.chain.row(out.draw_indices[j]));
    const gp::GpFit fit(grid, values, hyper);
    gp::Rng rng(derive_seed(config.seed, kRealization, j));
    try {
      out.realizations.push_back(fit.sample_realization(grid, rng));
    } catch (const IllConditionedError& e) {
      throw IllConditionedError("stage 1, realization " + std::to_string(j) + ": " + e.what(),
                                e.jitter());
    }
  }
  return out;
}

GammaPosterior run_stage2(const Stage1Result& stage1, const PipelineConfig& config,
                          std::size_t truncation) {
  config.validate();
  GammaPosterior post;
  post.config = config;
  post.config.truncation = truncation;
  post.requested = config.gamma_samples;
  post.dataset = fourier::build_dataset(stage1.realizations, stage1.spectrum.spacing(), truncation);

  const auto grid = post.dataset.grid();
  const Eigen::MatrixXd z = post.dataset.as_matrix();
  const mcmc::PriorSpec prior =
      mcmc::stage2_prior(post.dataset.max_frequency(), post.dataset.max_magnitude());
  auto target = guarded("stage 2", [&](std::span<const double> theta) {
    if (!std::isfinite(mcmc::log_prior(theta, prior))) return -std::numeric_limits<double>::infinity();
    return gp::ReplicatedGpFit(grid, z, gp::Stage2Hyper::from(theta)).log_likelihood();
  });

  const auto init = stage2_initial(post.dataset);
  post.stage2_chain = mcmc::dram_run(
      target,
      config.stage2.dram(mcmc::default_proposal(init),
                         derive_seed(config.seed, kStage2Chain, truncation)),
      init);
  post.stage2_chain.names = prior.names;
  post.stage2_ess = mcmc::min_effective_sample_size(post.stage2_chain);

  // One stage-2 hyperparameter draw per mean-width sample; identical chain
  // states share a factorization.
  std::map<std::vector<double>, gp::JointPrediction> at_origin;
  const std::vector<double> origin{0.0};
  const auto indices = mcmc::select_indices(post.stage2_chain, config.gamma_samples,
                                            derive_seed(config.seed, kStage2Select, truncation));
  gp::Rng rng(derive_seed(config.seed, kGammaDraw, truncation));
  for (std::size_t idx : indices) {
    const auto theta = post.stage2_chain.row(idx);
    auto it = at_origin.find(theta);
    if (it == at_origin.end()) {
      const gp::ReplicatedGpFit fit(grid, z, gp::Stage2Hyper::from(theta));
      it = at_origin.emplace(theta, fit.predict_with_derivative(origin)).first;
    }
    const auto draw = gp::sample_joint(it->second, rng);
    const auto gamma = fourier::gamma_estimate_from_point(draw.values(0), draw.derivatives(0));
    if (!gamma) {
      ++post.discarded;
    } else if (*gamma < 0.0) {
      ++post.rejected;
      if (config.positivity == Positivity::censor) post.samples.push_back(0.0);
    } else {
      post.samples.push_back(*gamma);
    }
  }
  if (post.rejected + post.discarded >= config.gamma_samples || post.samples.empty()) {
    throw EstimationFailed("all " + std::to_string(config.gamma_samples) +
                           " mean-width draws were invalid (P = " + std::to_string(truncation) + ")");
  }
  post.mean = stats::mean(post.samples);
  const auto iv = stats::central_interval(post.samples, 0.95);
  post.ci_lower = iv.lower;
  post.ci_upper = iv.upper;

  if (config.gamma_curve) {
    const auto curve_idx = mcmc::select_indices(post.stage2_chain, config.curve_draws,
                                                derive_seed(config.seed, kCurveSelect, truncation));
    gp::Rng curve_rng(derive_seed(config.seed, kCurveDraw, truncation));
    std::vector<gp::JointDraw> draws;
    draws.reserve(curve_idx.size());
    for (std::size_t idx : curve_idx) {
      const gp::ReplicatedGpFit fit(grid, z, gp::Stage2Hyper::from(post.stage2_chain.row(idx)));
      draws.push_back(gp::sample_joint(fit.predict_with_derivative(grid), curve_rng));
    }
    post.curve = fourier::gamma_curve(grid, draws);
  }
  return post;
}

RunResult run_full(const Spectrum& spectrum, const PipelineConfig& config) {
  RunResult r;
  r.stage1 = run_stage1(spectrum, config);
  r.posterior = run_stage2(r.stage1, config, config.truncation);
  return r;
}

GammaPosterior run(const Spectrum& spectrum, const PipelineConfig& config) {
  return run_full(spectrum, config).posterior;
}

std::vector<SensitivityRow> sensitivity_scan(const Spectrum& spectrum, const PipelineConfig& config,
                                             const std::vector<std::size_t>& truncations) {
  const Stage1Result s1 = run_stage1(spectrum, config);
  for (std::size_t p : truncations) {
    if (p > s1.spectrum.size()) {
      throw UsageError("sensitivity: P = " + std::to_string(p) + " exceeds spectrum length " +
                       std::to_string(s1.spectrum.size()));
    }
  }
  std::vector<SensitivityRow> rows;
  for (std::size_t p : truncations) {
    SensitivityRow row;
    row.truncation = p;
    try {
      const auto post = run_stage2(s1, config, p);
      row.ok = true;
      row.mean = post.mean;
      row.lower = post.ci_lower;
      row.upper = post.ci_upper;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

Summary summarize(const GammaPosterior& post) {
  if (post.samples.size() < 100) {
    throw UsageError("summarize: need at least 100 accepted samples, have " +
                     std::to_string(post.samples.size()));
  }
  Summary s;
  s.mean = stats::mean(post.samples);
  const auto iv = stats::central_interval(post.samples, 0.95);
  s.ci_lower = iv.lower;
  s.ci_upper = iv.upper;
  s.accepted = post.samples.size();
  s.rejected = post.rejected;
  s.discarded = post.discarded;
  s.stage2_ess = post.stage2_ess;
  return s;
}

}  // namespace linewidth::pipeline
