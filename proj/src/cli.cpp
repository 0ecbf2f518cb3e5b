#include "linewidth/cli.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "linewidth/errors.hpp"
#include "linewidth/mcmc.hpp"
#include "linewidth/scenario_io.hpp"

namespace linewidth::cli {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

template <class T>
T require_number(std::string_view s, std::string_view what) {
  auto v = parse_number<T>(s);
  if (!v) throw UsageError(std::string(what) + ": cannot parse '" + std::string(s) + "'");
  return *v;
}

bool parse_bool(std::string_view s, std::string_view what) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError(std::string(what) + ": expected a boolean, got '" + std::string(s) + "'");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

using Setter = std::function<void(pipeline::PipelineConfig&, std::string_view)>;

std::size_t count(std::string_view v, std::string_view key) {
  return require_number<std::size_t>(v, key);
}

// Applied in this order, so stage-specific chain keys win over the shared ones.
const std::vector<std::pair<std::string, Setter>>& setters() {
  using C = pipeline::PipelineConfig;
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"seed", [](C& c, auto v) { c.seed = require_number<std::uint64_t>(v, "seed"); }},
      {"realizations", [](C& c, auto v) { c.realizations = count(v, "realizations"); }},
      {"gamma_samples", [](C& c, auto v) { c.gamma_samples = count(v, "gamma_samples"); }},
      {"truncation",
       [](C& c, auto v) {
         const auto p = parse_truncations(v, "truncation");
         if (p.size() != 1) throw UsageError("truncation: expected a single value");
         c.truncation = p.front();
       }},
      {"region", [](C& c, auto v) { c.region = parse_region(v); }},
      {"positivity",
       [](C& c, auto v) {
         v = trim(v);
         if (v == "censor") {
           c.positivity = pipeline::Positivity::censor;
         } else if (v == "truncate") {
           c.positivity = pipeline::Positivity::truncate;
         } else {
           throw UsageError("positivity: expected 'censor' or 'truncate'");
         }
       }},
      {"gamma_curve", [](C& c, auto v) { c.gamma_curve = parse_bool(v, "gamma_curve"); }},
      {"curve_draws", [](C& c, auto v) { c.curve_draws = count(v, "curve_draws"); }},
      {"chain_length",
       [](C& c, auto v) { c.stage1.chain_length = c.stage2.chain_length = count(v, "chain_length"); }},
      {"burn_in", [](C& c, auto v) { c.stage1.burn_in = c.stage2.burn_in = count(v, "burn_in"); }},
      {"dr_stages", [](C& c, auto v) { c.stage1.dr_stages = c.stage2.dr_stages = count(v, "dr_stages"); }},
      {"dr_scale",
       [](C& c, auto v) { c.stage1.dr_scale = c.stage2.dr_scale = require_number<double>(v, "dr_scale"); }},
      {"adapt", [](C& c, auto v) { c.stage1.adapt = c.stage2.adapt = parse_bool(v, "adapt"); }},
      {"adaptation_start",
       [](C& c, auto v) {
         c.stage1.adaptation_start = c.stage2.adaptation_start = count(v, "adaptation_start");
       }},
      {"adaptation_interval",
       [](C& c, auto v) {
         c.stage1.adaptation_interval = c.stage2.adaptation_interval = count(v, "adaptation_interval");
       }},
      {"stage1.chain_length", [](C& c, auto v) { c.stage1.chain_length = count(v, "stage1.chain_length"); }},
      {"stage1.burn_in", [](C& c, auto v) { c.stage1.burn_in = count(v, "stage1.burn_in"); }},
      {"stage2.chain_length", [](C& c, auto v) { c.stage2.chain_length = count(v, "stage2.chain_length"); }},
      {"stage2.burn_in", [](C& c, auto v) { c.stage2.burn_in = count(v, "stage2.burn_in"); }},
  };
  return table;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  report::write_text(path, ss.str());
}

void write_samples(std::ostream& out, const std::vector<double>& samples) {
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "gamma\n";
  for (double s : samples) out << s << "\n";
}

report::RunManifest start_manifest(const RunOptions& o, const pipeline::PipelineConfig& c) {
  report::RunManifest m;
  m.command = o.command;
  m.inputs = o.inputs;
  m.region = c.region;
  m.overrides = o.settings;
  m.seed = c.seed;
  m.started = report::utc_timestamp();
  return m;
}

const char* kPlotStub = R"(# Plot the truncation sensitivity table written next to this script.
# Requires pandas and matplotlib.
import sys
import pandas as pd
import matplotlib.pyplot as plt

table = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "sensitivity.tsv", sep="\t")
table = table[table["status"] == "ok"]
plt.fill_between(table["P"], table["lower"], table["upper"], alpha=0.3, label="95% interval")
plt.plot(table["P"], table["mean"], "o-", label="posterior mean")
plt.xlabel("truncation P")
plt.ylabel("mean Lorentzian width [cm^-1]")
plt.legend()
plt.savefig("sensitivity.png", dpi=150)
)";

}  // namespace

pipeline::Region parse_region(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 2) throw UsageError("--region: expected LO:HI, got '" + std::string(text) + "'");
  const double a = require_number<double>(parts[0], "--region");
  const double b = require_number<double>(parts[1], "--region");
  if (a == b) throw UsageError("--region: empty interval");
  return {std::min(a, b), std::max(a, b)};
}

std::vector<std::size_t> parse_truncations(std::string_view text, std::string_view flag) {
  const std::string f(flag);
  const auto parts = split(text, ':');
  auto num = [&](std::string_view s) {
    auto v = parse_number<std::size_t>(s);
    if (!v) throw UsageError(f + ": malformed value '" + std::string(text) + "'");
    return *v;
  };
  if (parts.size() == 1) return {num(parts[0])};
  if (parts.size() != 3) {
    throw UsageError(f + ": expected P or start:step:stop, got '" + std::string(text) + "'");
  }
  const std::size_t start = num(parts[0]), step = num(parts[1]), stop = num(parts[2]);
  if (step == 0 || stop < start) {
    throw UsageError(f + ": need step > 0 and start <= stop in '" + std::string(text) + "'");
  }
  std::vector<std::size_t> out;
  for (std::size_t p = start; p <= stop; p += step) out.push_back(p);
  return out;
}

Settings read_settings(std::istream& in, const std::string& source) {
  Settings s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, lineno, "expected key = value");
    const std::string key(trim(v.substr(0, eq)));
    const std::string value(trim(v.substr(eq + 1)));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    s[key] = value;
  }
  return s;
}

Settings load_settings(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return read_settings(in, path.string());
}

std::vector<std::string> setting_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

void apply_settings(const Settings& settings, pipeline::PipelineConfig& config) {
  for (const auto& [key, _] : settings) {
    bool known = false;
    for (const auto& [k, setter] : setters()) known = known || k == key;
    if (!known) throw UsageError("unknown setting '" + key + "'");
  }
  for (const auto& [key, setter] : setters()) {
    if (auto it = settings.find(key); it != settings.end()) setter(config, it->second);
  }
}

pipeline::PipelineConfig make_config(const Settings& settings) {
  pipeline::PipelineConfig c;
  apply_settings(settings, c);
  c.validate();
  return c;
}

SynthResult cmd_synth(const SynthOptions& o) {
  SynthResult r;
  if (o.scenario) {
    r.scenario = load_scenario(*o.scenario);
    if (o.grid) r.scenario.grid = *o.grid;
    if (o.seed) r.scenario.noise.seed = pipeline::derive_seed(*o.seed, 0);
  } else {
    const auto kind = parse_scenario_kind(o.kind);
    if (o.bands == 0) throw UsageError("--bands must be >= 1");
    r.scenario = sample_scenario(kind, o.bands, o.seed.value_or(1), o.grid.value_or(GridSpec{}));
  }
  r.true_mean_gamma = true_mean_gamma(r.scenario.params);
  const Spectrum s = synth_spectrum(r.scenario.params, r.scenario.grid.make(), r.scenario.noise);

  ensure_dir(o.out);
  r.scenario_path = o.out / "scenario.txt";
  r.spectrum_path = o.out / "spectrum.txt";
  save_scenario(r.scenario_path, r.scenario);
  save_spectrum(r.spectrum_path, s);
  return r;
}

report::EstimateReport cmd_estimate(const fs::path& spectrum_path, const RunOptions& o) {
  Settings settings = o.settings;
  settings.try_emplace("gamma_curve", "true");
  const auto config = make_config(settings);
  RunOptions opts = o;
  opts.settings = settings;
  auto manifest = start_manifest(opts, config);

  const Spectrum spectrum = load_spectrum(spectrum_path);
  const auto result = pipeline::run_full(spectrum, config);
  manifest.finished = report::utc_timestamp();
  auto rep = report::make_report(result.posterior, manifest);

  ensure_dir(o.out);
  report::write_text(o.out / "report.json", report::to_json(rep));
  write_with(o.out / "gamma_samples.tsv",
             [&](std::ostream& out) { write_samples(out, result.posterior.samples); });
  if (result.posterior.curve) {
    write_with(o.out / "gamma_curve.tsv",
               [&](std::ostream& out) { fourier::write_gamma_curve(out, *result.posterior.curve); });
  }
  write_with(o.out / "stage1_chain.tsv",
             [&](std::ostream& out) { mcmc::write_chain(out, result.stage1.chain); });
  write_with(o.out / "stage2_chain.tsv",
             [&](std::ostream& out) { mcmc::write_chain(out, result.posterior.stage2_chain); });
  write_with(o.out / "fourier_dataset.tsv",
             [&](std::ostream& out) { fourier::write_dataset(out, result.posterior.dataset); });
  return rep;
}

std::vector<pipeline::SensitivityRow> cmd_sensitivity(const fs::path& spectrum_path,
                                                      const std::vector<std::size_t>& truncations,
                                                      const RunOptions& o) {
  if (truncations.empty()) throw UsageError("--P: no truncation values");
  const auto config = make_config(o.settings);
  auto manifest = start_manifest(o, config);
  const Spectrum spectrum = load_spectrum(spectrum_path);
  const auto rows = pipeline::sensitivity_scan(spectrum, config, truncations);
  manifest.finished = report::utc_timestamp();

  ensure_dir(o.out);
  write_with(o.out / "sensitivity.tsv", [&](std::ostream& out) {
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "P\tmean\tlower\tupper\tstatus\n";
    for (const auto& r : rows) {
      out << r.truncation << "\t" << r.mean << "\t" << r.lower << "\t" << r.upper << "\t"
          << (r.ok ? "ok" : "failed") << "\n";
    }
  });
  nlohmann::json j;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"P", r.truncation},
                         {"ok", r.ok},
                         {"gamma_mean", r.mean},
                         {"gamma_ci95", {r.lower, r.upper}},
                         {"error", r.error}});
  }
  j["manifest"] = {{"command", manifest.command}, {"inputs", manifest.inputs},
                   {"overrides", manifest.overrides}, {"seed", manifest.seed},
                   {"version", manifest.version}, {"started", manifest.started},
                   {"finished", manifest.finished}};
  if (manifest.region) {
    j["manifest"]["region"] = {manifest.region->lo, manifest.region->hi};
  } else {
    j["manifest"]["region"] = nullptr;
  }
  report::write_text(o.out / "sensitivity.json", j.dump(2) + "\n");
  report::write_text(o.out / "plot_sensitivity.py", kPlotStub);
  return rows;
}

report::CoverageReport cmd_validate(const fs::path& scenario_path, std::size_t repeats,
                                    const RunOptions& o) {
  if (repeats == 0) throw UsageError("--repeats must be >= 1");
  const auto base = make_config(o.settings);
  const Scenario sc = load_scenario(scenario_path);
  const auto grid = sc.grid.make();

  report::CoverageReport rep;
  rep.scenario = scenario_path.string();
  rep.truth = true_mean_gamma(sc.params);
  rep.config = base;
  rep.manifest = start_manifest(o, base);

  for (std::size_t r = 0; r < repeats; ++r) {
    report::CoverageRow row;
    row.repeat = r;
    row.noise_seed = pipeline::derive_seed(base.seed, 1000, r);
    row.pipeline_seed = pipeline::derive_seed(base.seed, 1001, r);
    NoiseSpec noise = sc.noise;
    noise.seed = row.noise_seed;
    const Spectrum s = synth_spectrum(sc.params, grid, noise);
    auto config = base;
    config.seed = row.pipeline_seed;
    try {
      const auto post = pipeline::run(s, config);
      row.ok = true;
      row.mean = post.mean;
      row.lower = post.ci_lower;
      row.upper = post.ci_upper;
      row.rejected = post.rejected;
      row.covered = row.lower <= rep.truth && rep.truth <= row.upper;
    } catch (const EstimationFailed& e) {
      row.error = e.what();
    } catch (const IllConditionedError& e) {
      row.error = e.what();
    }
    rep.rows.push_back(row);
  }
  report::finalize(rep);
  rep.manifest.finished = report::utc_timestamp();

  ensure_dir(o.out);
  report::write_text(o.out / "coverage.json", report::to_json(rep));
  write_with(o.out / "coverage.tsv", [&](std::ostream& out) {
    out.precision(std::numeric_limits<double>::max_digits10);
    out << "repeat\tnoise_seed\tpipeline_seed\tmean\tlower\tupper\tcovered\tstatus\n";
    for (const auto& row : rep.rows) {
      out << row.repeat << "\t" << row.noise_seed << "\t" << row.pipeline_seed << "\t" << row.mean
          << "\t" << row.lower << "\t" << row.upper << "\t" << (row.covered ? 1 : 0) << "\t"
          << (row.ok ? "ok" : "failed") << "\n";
    }
  });
  return rep;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posterior estimation of the mean Lorentzian line width of a spectrum"};
  app.require_subcommand(1);
  app.set_version_flag("--version", report::kToolVersion);

  SynthOptions synth;
  std::string synth_seed, synth_grid, synth_scenario;
  auto* s = app.add_subcommand("synth", "Generate a synthetic scenario and its noisy spectrum");
  s->add_option("--kind", synth.kind, "lorentzian, gaussian or voigt")->capture_default_str();
  s->add_option("--bands", synth.bands, "Number of bands M")->capture_default_str();
  s->add_option("--seed", synth_seed, "Master seed");
  s->add_option("--grid", synth_grid, "Wavenumber grid LO:HI:N");
  s->add_option("--scenario", synth_scenario, "Reuse the parameters of a scenario file");
  s->add_option("--out", synth.out, "Output directory")->capture_default_str();

  // Options shared by the pipeline commands; CLI values override the config file.
  struct Common {
    std::string config, seed, region, chain_length, burn_in, realizations, gamma_samples, truncation;
    std::vector<std::string> set;
    fs::path out = ".";
  };
  auto add_common = [](CLI::App* sub, Common& c, bool with_p) {
    sub->add_option("--config", c.config, "Flat key = value config file");
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--region", c.region, "Wavenumber interval LO:HI (HI:LO accepted)");
    sub->add_option("--chain-length", c.chain_length, "MCMC chain length (both stages)");
    sub->add_option("--burn-in", c.burn_in, "MCMC burn-in (both stages)");
    sub->add_option("--realizations", c.realizations, "Stage-1 realizations J");
    sub->add_option("--gamma-samples", c.gamma_samples, "Mean-width draws J_z");
    if (with_p) sub->add_option("--P", c.truncation, "Truncation P");
    sub->add_option("--set", c.set, "Extra setting key=value (repeatable)");
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  };

  Common est_opts, sens_opts, val_opts;
  std::string est_spectrum, sens_spectrum, val_scenario, sens_p;
  std::size_t repeats = 10;

  auto* e = app.add_subcommand("estimate", "Run the two-stage estimator on a spectrum file");
  e->add_option("spectrum", est_spectrum, "Two-column spectrum file")->required();
  add_common(e, est_opts, true);

  auto* sn = app.add_subcommand("sensitivity", "Scan the truncation parameter P");
  sn->add_option("spectrum", sens_spectrum, "Two-column spectrum file")->required();
  add_common(sn, sens_opts, false);
  sn->add_option("--P", sens_p, "P or start:step:stop")->required();

  auto* v = app.add_subcommand("validate", "Coverage of the 95% interval over noisy repeats");
  v->add_option("scenario", val_scenario, "Scenario file")->required();
  v->add_option("--repeats", repeats, "Number of noisy repeats")->capture_default_str();
  add_common(v, val_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  auto settings_of = [](const Common& c) {
    Settings st = c.config.empty() ? Settings{} : load_settings(c.config);
    for (const auto& kv : c.set) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set: expected key=value, got '" + kv + "'");
      st[std::string(trim(std::string_view(kv).substr(0, eq)))] =
          std::string(trim(std::string_view(kv).substr(eq + 1)));
    }
    const std::pair<const std::string*, const char*> flags[] = {
        {&c.seed, "seed"},         {&c.region, "region"},
        {&c.chain_length, "chain_length"}, {&c.burn_in, "burn_in"},
        {&c.realizations, "realizations"}, {&c.gamma_samples, "gamma_samples"},
        {&c.truncation, "truncation"}};
    for (const auto& [value, key] : flags) {
      if (!value->empty()) st[key] = *value;
    }
    if (!c.region.empty()) {
      const auto r = parse_region(c.region);
      std::ostringstream ss;
      ss.precision(std::numeric_limits<double>::max_digits10);
      ss << r.lo << ":" << r.hi;
      st["region"] = ss.str();
    }
    return st;
  };
  auto command_line = [&] {
    std::string cmd;
    for (int i = 0; i < argc; ++i) cmd += (i ? " " : "") + std::string(argv[i]);
    return cmd;
  };

  try {
    if (*s) {
      if (!synth_seed.empty()) synth.seed = require_number<std::uint64_t>(synth_seed, "--seed");
      if (!synth_scenario.empty()) synth.scenario = synth_scenario;
      if (!synth_grid.empty()) {
        const auto parts = split(synth_grid, ':');
        if (parts.size() != 3) throw UsageError("--grid: expected LO:HI:N");
        synth.grid = GridSpec{require_number<double>(parts[0], "--grid"),
                              require_number<double>(parts[1], "--grid"),
                              require_number<std::size_t>(parts[2], "--grid")};
      }
      const auto r = cmd_synth(synth);
      out.precision(std::numeric_limits<double>::max_digits10);
      out << "true_mean_gamma = " << r.true_mean_gamma << "\n";
    } else if (*e) {
      RunOptions o{settings_of(est_opts), est_opts.out, command_line(), {est_spectrum}};
      const auto rep = cmd_estimate(est_spectrum, o);
      out << "gamma_mean = " << rep.summary.mean << "  ci95 = [" << rep.summary.ci_lower << ", "
          << rep.summary.ci_upper << "]\n";
    } else if (*sn) {
      RunOptions o{settings_of(sens_opts), sens_opts.out, command_line(), {sens_spectrum}};
      const auto rows = cmd_sensitivity(sens_spectrum, parse_truncations(sens_p, "--P"), o);
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.ok ? 0 : 1;
      out << rows.size() << " rows, " << failed << " failed\n";
    } else if (*v) {
      RunOptions o{settings_of(val_opts), val_opts.out, command_line(), {val_scenario}};
      const auto rep = cmd_validate(val_scenario, repeats, o);
      out << "coverage = " << rep.coverage << " over " << rep.rows.size() << " repeats\n";
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace linewidth::cli
