#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "linewidth/cli.hpp"
#include "linewidth/errors.hpp"
#include "linewidth/scenario_io.hpp"

using namespace linewidth;
using namespace linewidth::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "linewidth");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("linewidth_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::vector<std::string> kFast{"--set", "stage1.chain_length=1200", "--set", "stage1.burn_in=600",
                                     "--set", "stage2.chain_length=1500", "--set", "stage2.burn_in=750",
                                     "--realizations", "5", "--gamma-samples", "200"};

std::vector<std::string> with_fast(std::vector<std::string> args) {
  args.insert(args.end(), kFast.begin(), kFast.end());
  return args;
}

// Small single-band spectrum shared by the pipeline commands.
fs::path small_spectrum() {
  static const fs::path dir = [] {
    const auto d = scratch("spectrum");
    const auto r = invoke({"synth", "--kind", "lorentzian", "--bands", "1", "--seed", "4", "--grid",
                           "1550:1750:128", "--out", d.string()});
    REQUIRE(r.status == 0);
    return d;
  }();
  return dir / "spectrum.txt";
}

}  // namespace

TEST_CASE("region parsing normalizes descending intervals") {
  const auto a = parse_region("1240:1060");
  CHECK(a.lo == 1060.0);
  CHECK(a.hi == 1240.0);
  const auto b = parse_region("1060:1240");
  CHECK(b.lo == 1060.0);
  CHECK(b.hi == 1240.0);
  for (const char* bad : {"1060", "a:b", "1:2:3", "5:5"}) {
    try {
      parse_region(bad);
      FAIL("expected a usage error");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("--region") != std::string::npos);
    }
  }
}

TEST_CASE("truncation ranges expand inclusively") {
  const auto p = parse_truncations("20:5:100");
  REQUIRE(p.size() == 17);
  CHECK(p.front() == 20);
  CHECK(p[1] == 25);
  CHECK(p.back() == 100);
  CHECK(parse_truncations("30") == std::vector<std::size_t>{30});
  for (const char* bad : {"20:5", "x", "20:0:30", "30:5:20", "20:5:1a"}) {
    try {
      parse_truncations(bad, "--P");
      FAIL("expected a usage error");
    } catch (const UsageError& e) {
      CHECK(std::string(e.what()).find("--P") != std::string::npos);
    }
  }
}

TEST_CASE("config files: comments, errors with line numbers, unknown keys") {
  std::istringstream in("# desk scale\nchain_length = 4000  # both stages\n\nburn_in=2000\nstage2.burn_in = 1000\n");
  const auto s = read_settings(in, "run.cfg");
  CHECK(s.at("chain_length") == "4000");
  const auto c = make_config(s);
  CHECK(c.stage1.chain_length == 4000);
  CHECK(c.stage1.burn_in == 2000);
  CHECK(c.stage2.burn_in == 1000);

  std::istringstream bad("seed = 3\nnonsense\n");
  try {
    read_settings(bad, "run.cfg");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(make_config({{"chain_lenght", "10"}}), UsageError);
  CHECK_THROWS_AS(make_config({{"positivity", "maybe"}}), UsageError);
  CHECK_THROWS_AS(make_config({{"truncation", "20:5:30"}}), UsageError);
  const auto keys = setting_keys();
  CHECK(std::find(keys.begin(), keys.end(), "gamma_samples") != keys.end());
}

TEST_CASE("synth writes a scenario and a spectrum") {
  const auto dir = scratch("synth");
  const auto r = invoke({"synth", "--kind", "voigt", "--bands", "6", "--seed", "9", "--out", dir.string()});
  REQUIRE(r.status == 0);
  CHECK(r.out.rfind("true_mean_gamma = ", 0) == 0);
  const auto sc = load_scenario(dir / "scenario.txt");
  CHECK(sc.params.size() == 6);
  CHECK(sc.kind == ScenarioKind::voigt);
  const auto sp = load_spectrum(dir / "spectrum.txt");
  CHECK(sp.size() == 512);

  // Reusing the scenario with another seed changes only the noise.
  const auto again = scratch("synth2");
  REQUIRE(invoke({"synth", "--scenario", (dir / "scenario.txt").string(), "--seed", "10", "--out",
                  again.string()})
              .status == 0);
  const auto sc2 = load_scenario(again / "scenario.txt");
  CHECK(sc2.params.areas == sc.params.areas);
  CHECK(sc2.noise.sigma_epsilon == sc.noise.sigma_epsilon);
  CHECK(sc2.noise.seed != sc.noise.seed);
}

TEST_CASE("bad invocations exit nonzero with a message on the error stream") {
  const auto missing = invoke({"estimate", "/nonexistent/dir/spectrum.txt"});
  CHECK(missing.status != 0);
  CHECK(missing.err.find("/nonexistent/dir/spectrum.txt") != std::string::npos);
  CHECK(missing.out.empty());

  const auto cfg = invoke({"estimate", small_spectrum().string(), "--config", "/nonexistent/run.cfg"});
  CHECK(cfg.status != 0);
  CHECK(cfg.err.find("/nonexistent/run.cfg") != std::string::npos);

  const auto range = invoke({"sensitivity", small_spectrum().string(), "--P", "20:5"});
  CHECK(range.status != 0);
  CHECK(range.err.find("--P") != std::string::npos);

  CHECK(invoke({}).status != 0);
  CHECK(invoke({"estimate"}).status != 0);
  CHECK(invoke({"frobnicate"}).status != 0);
  CHECK(invoke({"estimate", small_spectrum().string(), "--set", "bogus=1"}).status != 0);
}

TEST_CASE("estimate writes the report and reruns are identical up to timestamps") {
  const auto dir = scratch("estimate");
  const auto args = with_fast({"estimate", small_spectrum().string(), "--seed", "3", "--P", "12", "--out",
                               dir.string()});
  const auto r = invoke(args);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("gamma_mean = ") != std::string::npos);
  for (const char* f : {"report.json", "gamma_samples.tsv", "gamma_curve.tsv", "stage1_chain.tsv",
                        "stage2_chain.tsv", "fourier_dataset.tsv"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto first = slurp(dir / "report.json");
  const auto j = nlohmann::json::parse(first);
  CHECK(j.at("gamma_ci95").size() == 2);
  CHECK(j.at("config").at("truncation") == 12);
  CHECK(j.at("config").at("seed") == 3);
  CHECK(j.at("manifest").at("inputs").at(0) == small_spectrum().string());

  REQUIRE(invoke(args).status == 0);
  const auto second = slurp(dir / "report.json");
  const std::regex stamp(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)");
  CHECK(std::regex_replace(first, stamp, "T") == std::regex_replace(second, stamp, "T"));
}

TEST_CASE("command-line flags override the config file") {
  const auto dir = scratch("precedence");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "seed = 5\ntruncation = 10\nrealizations = 4\nregion = 1750:1560\n";
  }
  const auto r = invoke(with_fast({"estimate", small_spectrum().string(), "--config", (dir / "run.cfg").string(),
                                   "--P", "8", "--out", dir.string()}));
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  CHECK(j.at("config").at("truncation") == 8);
  CHECK(j.at("config").at("seed") == 5);
  CHECK(j.at("config").at("realizations") == 5);
  CHECK(j.at("config").at("region").at(0) == 1560.0);
  CHECK(j.at("config").at("stage1").at("chain_length") == 1200);
}

TEST_CASE("sensitivity writes one row per truncation") {
  const auto dir = scratch("sensitivity");
  const auto r = invoke(with_fast({"sensitivity", small_spectrum().string(), "--P", "8:4:16", "--out", dir.string()}));
  REQUIRE(r.status == 0);
  std::istringstream table(slurp(dir / "sensitivity.tsv"));
  std::string line;
  std::getline(table, line);
  CHECK(line == "P\tmean\tlower\tupper\tstatus");
  std::vector<std::string> ps;
  while (std::getline(table, line)) ps.push_back(line.substr(0, line.find('\t')));
  CHECK(ps == std::vector<std::string>{"8", "12", "16"});
  CHECK(fs::exists(dir / "sensitivity.json"));
  CHECK(fs::exists(dir / "plot_sensitivity.py"));

  const auto one = scratch("sensitivity1");
  REQUIRE(invoke(with_fast({"sensitivity", small_spectrum().string(), "--P", "10", "--out", one.string()})).status == 0);
  const auto text = slurp(one / "sensitivity.tsv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}

TEST_CASE("validate with one repeat reports coverage 0 or 1 and echoes the manifest") {
  const auto dir = scratch("validate");
  const auto scenario = small_spectrum().parent_path() / "scenario.txt";
  const auto r = invoke(with_fast({"validate", scenario.string(), "--repeats", "1", "--P", "10", "--seed", "2",
                                   "--out", dir.string()}));
  REQUIRE(r.status == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "coverage.json"));
  const double cov = j.at("coverage");
  CHECK((cov == 0.0 || cov == 1.0));
  CHECK(j.at("runs").size() == 1);
  CHECK(j.at("manifest").at("seed") == 2);
  CHECK(j.at("manifest").at("inputs").at(0) == scenario.string());
  CHECK(fs::exists(dir / "coverage.tsv"));
}
