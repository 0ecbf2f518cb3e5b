#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linewidth/lineshape.hpp"
#include "linewidth/pipeline.hpp"
#include "linewidth/report.hpp"

namespace linewidth::cli {

using Settings = std::map<std::string, std::string>;

/// "LO:HI" or "HI:LO"; the result is always ascending.
pipeline::Region parse_region(std::string_view text);

/// "P" or "start:step:stop" (inclusive). Errors name `flag`.
std::vector<std::size_t> parse_truncations(std::string_view text, std::string_view flag = "--P");

/// Flat `key = value` lines; '#' starts a comment.
Settings read_settings(std::istream& in, const std::string& source = "<stream>");
Settings load_settings(const std::filesystem::path& path);

/// Applies recognised keys; unknown keys are a usage error.
void apply_settings(const Settings& settings, pipeline::PipelineConfig& config);

/// Keys understood by apply_settings.
std::vector<std::string> setting_keys();

struct SynthOptions {
  std::optional<std::filesystem::path> scenario;  ///< reuse parameters from a file
  std::string kind = "lorentzian";
  std::size_t bands = 8;
  std::optional<std::uint64_t> seed;
  std::optional<GridSpec> grid;
  std::filesystem::path out = ".";
};

struct SynthResult {
  Scenario scenario;
  double true_mean_gamma = 0.0;
  std::filesystem::path scenario_path;
  std::filesystem::path spectrum_path;
};

SynthResult cmd_synth(const SynthOptions& options);

struct RunOptions {
  Settings settings;  ///< config file merged with command-line overrides
  std::filesystem::path out = ".";
  std::string command;
  std::vector<std::string> inputs;
};

pipeline::PipelineConfig make_config(const Settings& settings);

report::EstimateReport cmd_estimate(const std::filesystem::path& spectrum, const RunOptions& options);

std::vector<pipeline::SensitivityRow> cmd_sensitivity(const std::filesystem::path& spectrum,
                                                      const std::vector<std::size_t>& truncations,
                                                      const RunOptions& options);

report::CoverageReport cmd_validate(const std::filesystem::path& scenario, std::size_t repeats,
                                    const RunOptions& options);

/// Full command line entry point. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linewidth::cli
