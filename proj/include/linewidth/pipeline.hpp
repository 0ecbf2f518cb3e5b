#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linewidth/fourier.hpp"
#include "linewidth/lineshape.hpp"
#include "linewidth/mcmc.hpp"

namespace linewidth::pipeline {

struct ChainSettings {
  std::size_t chain_length = 10000;
  std::size_t burn_in = 5000;
  std::size_t dr_stages = 3;
  double dr_scale = 0.2;
  bool adapt = true;
  std::size_t adaptation_start = 1000;
  std::size_t adaptation_interval = 100;

  mcmc::DramConfig dram(const Eigen::MatrixXd& proposal, std::uint64_t seed) const;
};

struct Region {
  double lo;
  double hi;
};

/// How draws with a negative mean width are handled.
enum class Positivity {
  censor,    ///< kept, set to zero
  truncate,  ///< dropped
};

struct PipelineConfig {
  std::size_t realizations = 50;      ///< J
  std::size_t gamma_samples = 5000;   ///< J_z
  std::size_t truncation = 30;        ///< P
  ChainSettings stage1;
  ChainSettings stage2;
  std::optional<Region> region;
  std::uint64_t seed = 1;
  Positivity positivity = Positivity::censor;
  bool gamma_curve = false;
  std::size_t curve_draws = 500;

  void validate() const;
};

/// Seed for an independent random stream, derived from the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

struct Stage1Result {
  Spectrum spectrum;  ///< after region selection
  mcmc::Chain chain;
  std::vector<std::size_t> draw_indices;
  std::vector<std::vector<double>> realizations;
};

struct GammaPosterior {
  std::vector<double> samples;
  std::size_t requested = 0;
  std::size_t rejected = 0;   ///< draws with negative mean width
  std::size_t discarded = 0;  ///< draws with a non-positive Fourier value at the origin
  double mean = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double stage2_ess = 0.0;
  PipelineConfig config;
  mcmc::Chain stage2_chain;
  fourier::FourierDataset dataset;
  std::optional<fourier::GammaCurve> curve;
};

struct RunResult {
  Stage1Result stage1;
  GammaPosterior posterior;
};

std::vector<double> stage1_initial(const Spectrum& spectrum);
std::vector<double> stage2_initial(const fourier::FourierDataset& dataset);

/// Steps 1-2: spectrum-domain chain and J posterior-predictive realizations.
Stage1Result run_stage1(const Spectrum& spectrum, const PipelineConfig& config);

/// Steps 3-5 for truncation P on the realizations of `stage1`.
GammaPosterior run_stage2(const Stage1Result& stage1, const PipelineConfig& config,
                          std::size_t truncation);

RunResult run_full(const Spectrum& spectrum, const PipelineConfig& config);
GammaPosterior run(const Spectrum& spectrum, const PipelineConfig& config);

struct SensitivityRow {
  std::size_t truncation = 0;
  bool ok = false;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string error;
};

/// Stage 1 once, stage 2 per truncation value; rows follow the input order.
std::vector<SensitivityRow> sensitivity_scan(const Spectrum& spectrum, const PipelineConfig& config,
                                             const std::vector<std::size_t>& truncations);

struct Summary {
  double mean = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t discarded = 0;
  double stage2_ess = 0.0;

  bool operator==(const Summary&) const = default;
};

/// Needs at least 100 accepted samples.
Summary summarize(const GammaPosterior& posterior);

}  // namespace linewidth::pipeline
