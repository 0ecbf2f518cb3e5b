#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "linewidth/pipeline.hpp"

namespace linewidth::report {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance recorded verbatim into every report.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::optional<pipeline::Region> region;
  std::map<std::string, std::string> overrides;  ///< effective key = value settings
  std::uint64_t seed = 0;
  std::string version = kToolVersion;
  std::string started;   ///< ISO 8601, UTC
  std::string finished;

  bool operator==(const RunManifest&) const;
};

/// Current UTC time, second resolution.
std::string utc_timestamp();

struct EstimateReport {
  pipeline::Summary summary;
  std::size_t requested = 0;
  std::size_t truncation = 0;
  pipeline::PipelineConfig config;
  RunManifest manifest;

  bool operator==(const EstimateReport&) const;
};

EstimateReport make_report(const pipeline::GammaPosterior& posterior, const RunManifest& manifest);

struct CoverageRow {
  std::size_t repeat = 0;
  std::uint64_t noise_seed = 0;
  std::uint64_t pipeline_seed = 0;
  bool ok = false;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool covered = false;
  std::size_t rejected = 0;
  std::string error;

  bool operator==(const CoverageRow&) const = default;
};

struct CoverageReport {
  std::string scenario;
  double truth = 0.0;
  std::vector<CoverageRow> rows;
  double coverage = 0.0;    ///< covered / repeats; failed runs count as not covered
  double mean_width = 0.0;  ///< over successful runs
  pipeline::PipelineConfig config;
  RunManifest manifest;

  bool operator==(const CoverageReport&) const;
};

/// Fills `coverage` and `mean_width` from the rows.
void finalize(CoverageReport& report);

std::string to_json(const EstimateReport& report);
EstimateReport estimate_from_json(const std::string& text);
std::string to_json(const CoverageReport& report);
CoverageReport coverage_from_json(const std::string& text);

/// Writes `text` to `path`, throwing IoError naming the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace linewidth::report
