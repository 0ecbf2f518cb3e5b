#include "linewidth/report.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "linewidth/errors.hpp"

namespace linewidth::pipeline {

using nlohmann::json;

static void to_json(json& j, const ChainSettings& c) {
  j = json{{"chain_length", c.chain_length},
           {"burn_in", c.burn_in},
           {"dr_stages", c.dr_stages},
           {"dr_scale", c.dr_scale},
           {"adapt", c.adapt},
           {"adaptation_start", c.adaptation_start},
           {"adaptation_interval", c.adaptation_interval}};
}

static void from_json(const json& j, ChainSettings& c) {
  j.at("chain_length").get_to(c.chain_length);
  j.at("burn_in").get_to(c.burn_in);
  j.at("dr_stages").get_to(c.dr_stages);
  j.at("dr_scale").get_to(c.dr_scale);
  j.at("adapt").get_to(c.adapt);
  j.at("adaptation_start").get_to(c.adaptation_start);
  j.at("adaptation_interval").get_to(c.adaptation_interval);
}

static void to_json(json& j, const Region& r) { j = json::array({r.lo, r.hi}); }
static void from_json(const json& j, Region& r) {
  r.lo = j.at(0).get<double>();
  r.hi = j.at(1).get<double>();
}

static void to_json(json& j, const PipelineConfig& c) {
  j = json{{"realizations", c.realizations},
           {"gamma_samples", c.gamma_samples},
           {"truncation", c.truncation},
           {"stage1", c.stage1},
           {"stage2", c.stage2},
           {"region", c.region ? json(*c.region) : json(nullptr)},
           {"seed", c.seed},
           {"positivity", c.positivity == Positivity::censor ? "censor" : "truncate"},
           {"gamma_curve", c.gamma_curve},
           {"curve_draws", c.curve_draws}};
}

static void from_json(const json& j, PipelineConfig& c) {
  j.at("realizations").get_to(c.realizations);
  j.at("gamma_samples").get_to(c.gamma_samples);
  j.at("truncation").get_to(c.truncation);
  j.at("stage1").get_to(c.stage1);
  j.at("stage2").get_to(c.stage2);
  if (j.at("region").is_null()) {
    c.region.reset();
  } else {
    c.region = j.at("region").get<Region>();
  }
  j.at("seed").get_to(c.seed);
  const auto pos = j.at("positivity").get<std::string>();
  if (pos == "censor") {
    c.positivity = Positivity::censor;
  } else if (pos == "truncate") {
    c.positivity = Positivity::truncate;
  } else {
    throw ParseError("<json>", 0, "unknown positivity '" + pos + "'");
  }
  j.at("gamma_curve").get_to(c.gamma_curve);
  j.at("curve_draws").get_to(c.curve_draws);
}

}  // namespace linewidth::pipeline

namespace linewidth::report {

using nlohmann::json;

namespace {

bool same_chain(const pipeline::ChainSettings& a, const pipeline::ChainSettings& b) {
  return a.chain_length == b.chain_length && a.burn_in == b.burn_in && a.dr_stages == b.dr_stages &&
         a.dr_scale == b.dr_scale && a.adapt == b.adapt && a.adaptation_start == b.adaptation_start &&
         a.adaptation_interval == b.adaptation_interval;
}

bool same_region(const std::optional<pipeline::Region>& a, const std::optional<pipeline::Region>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->lo == b->lo && a->hi == b->hi);
}

bool same_config(const pipeline::PipelineConfig& a, const pipeline::PipelineConfig& b) {
  return a.realizations == b.realizations && a.gamma_samples == b.gamma_samples &&
         a.truncation == b.truncation && same_chain(a.stage1, b.stage1) &&
         same_chain(a.stage2, b.stage2) && same_region(a.region, b.region) && a.seed == b.seed &&
         a.positivity == b.positivity && a.gamma_curve == b.gamma_curve &&
         a.curve_draws == b.curve_draws;
}

json manifest_json(const RunManifest& m) {
  return json{{"command", m.command},
              {"inputs", m.inputs},
              {"region", m.region ? json(*m.region) : json(nullptr)},
              {"overrides", m.overrides},
              {"seed", m.seed},
              {"version", m.version},
              {"started", m.started},
              {"finished", m.finished}};
}

RunManifest manifest_from(const json& j) {
  RunManifest m;
  j.at("command").get_to(m.command);
  j.at("inputs").get_to(m.inputs);
  if (!j.at("region").is_null()) m.region = j.at("region").get<pipeline::Region>();
  j.at("overrides").get_to(m.overrides);
  j.at("seed").get_to(m.seed);
  j.at("version").get_to(m.version);
  j.at("started").get_to(m.started);
  j.at("finished").get_to(m.finished);
  return m;
}

template <class Fn>
auto parse_json(const std::string& text, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw ParseError("<json>", 0, e.what());
  }
}

}  // namespace

bool RunManifest::operator==(const RunManifest& o) const {
  return command == o.command && inputs == o.inputs && same_region(region, o.region) &&
         overrides == o.overrides && seed == o.seed && version == o.version &&
         started == o.started && finished == o.finished;
}

bool EstimateReport::operator==(const EstimateReport& o) const {
  return summary == o.summary && requested == o.requested && truncation == o.truncation &&
         same_config(config, o.config) && manifest == o.manifest;
}

bool CoverageReport::operator==(const CoverageReport& o) const {
  return scenario == o.scenario && truth == o.truth && rows == o.rows && coverage == o.coverage &&
         mean_width == o.mean_width && same_config(config, o.config) && manifest == o.manifest;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

EstimateReport make_report(const pipeline::GammaPosterior& posterior, const RunManifest& manifest) {
  EstimateReport r;
  r.summary = pipeline::summarize(posterior);
  r.requested = posterior.requested;
  r.truncation = posterior.config.truncation;
  r.config = posterior.config;
  r.manifest = manifest;
  return r;
}

void finalize(CoverageReport& report) {
  std::size_t covered = 0, ok = 0;
  double width = 0.0;
  for (const auto& row : report.rows) {
    if (row.covered) ++covered;
    if (row.ok) {
      ++ok;
      width += row.upper - row.lower;
    }
  }
  report.coverage = report.rows.empty() ? 0.0 : static_cast<double>(covered) / report.rows.size();
  report.mean_width = ok ? width / static_cast<double>(ok) : 0.0;
}

std::string to_json(const EstimateReport& r) {
  const auto& s = r.summary;
  json j{{"gamma_mean", s.mean},
         {"gamma_ci95", {s.ci_lower, s.ci_upper}},
         {"accepted", s.accepted},
         {"rejected", s.rejected},
         {"discarded", s.discarded},
         {"requested", r.requested},
         {"truncation", r.truncation},
         {"stage2_ess", s.stage2_ess},
         {"config", r.config},
         {"manifest", manifest_json(r.manifest)}};
  return j.dump(2) + "\n";
}

EstimateReport estimate_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) {
    EstimateReport r;
    j.at("gamma_mean").get_to(r.summary.mean);
    r.summary.ci_lower = j.at("gamma_ci95").at(0).get<double>();
    r.summary.ci_upper = j.at("gamma_ci95").at(1).get<double>();
    j.at("accepted").get_to(r.summary.accepted);
    j.at("rejected").get_to(r.summary.rejected);
    j.at("discarded").get_to(r.summary.discarded);
    j.at("stage2_ess").get_to(r.summary.stage2_ess);
    j.at("requested").get_to(r.requested);
    j.at("truncation").get_to(r.truncation);
    j.at("config").get_to(r.config);
    r.manifest = manifest_from(j.at("manifest"));
    return r;
  });
}

std::string to_json(const CoverageReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(json{{"repeat", row.repeat},
                        {"noise_seed", row.noise_seed},
                        {"pipeline_seed", row.pipeline_seed},
                        {"ok", row.ok},
                        {"gamma_mean", row.mean},
                        {"gamma_ci95", {row.lower, row.upper}},
                        {"covered", row.covered},
                        {"rejected", row.rejected},
                        {"error", row.error}});
  }
  json j{{"scenario", r.scenario},
         {"true_mean_gamma", r.truth},
         {"repeats", r.rows.size()},
         {"coverage", r.coverage},
         {"mean_interval_width", r.mean_width},
         {"runs", rows},
         {"config", r.config},
         {"manifest", manifest_json(r.manifest)}};
  return j.dump(2) + "\n";
}

CoverageReport coverage_from_json(const std::string& text) {
  return parse_json(text, [](const json& j) {
    CoverageReport r;
    j.at("scenario").get_to(r.scenario);
    j.at("true_mean_gamma").get_to(r.truth);
    j.at("coverage").get_to(r.coverage);
    j.at("mean_interval_width").get_to(r.mean_width);
    for (const auto& row : j.at("runs")) {
      CoverageRow c;
      row.at("repeat").get_to(c.repeat);
      row.at("noise_seed").get_to(c.noise_seed);
      row.at("pipeline_seed").get_to(c.pipeline_seed);
      row.at("ok").get_to(c.ok);
      row.at("gamma_mean").get_to(c.mean);
      c.lower = row.at("gamma_ci95").at(0).get<double>();
      c.upper = row.at("gamma_ci95").at(1).get<double>();
      row.at("covered").get_to(c.covered);
      row.at("rejected").get_to(c.rejected);
      row.at("error").get_to(c.error);
      r.rows.push_back(c);
    }
    j.at("config").get_to(r.config);
    r.manifest = manifest_from(j.at("manifest"));
    return r;
  });
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed: '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace linewidth::report
