#include <doctest.h>

#include <filesystem>
#include <regex>

#include "linewidth/errors.hpp"
#include "linewidth/report.hpp"

using namespace linewidth;
using namespace linewidth::report;

namespace {

RunManifest manifest() {
  RunManifest m;
  m.command = "linewidth estimate spectrum.txt --seed 7";
  m.inputs = {"spectrum.txt"};
  m.region = pipeline::Region{1060.0, 1240.0};
  m.overrides = {{"seed", "7"}, {"region", "1060:1240"}};
  m.seed = 7;
  m.started = "2026-01-02T03:04:05Z";
  m.finished = "2026-01-02T03:05:06Z";
  return m;
}

pipeline::PipelineConfig config() {
  pipeline::PipelineConfig c;
  c.realizations = 30;
  c.gamma_samples = 2000;
  c.truncation = 25;
  c.stage2.dr_scale = 0.125;
  c.region = pipeline::Region{1060.0, 1240.0};
  c.positivity = pipeline::Positivity::truncate;
  c.seed = 7;
  return c;
}

}  // namespace

TEST_CASE("estimate report survives a JSON round trip") {
  pipeline::GammaPosterior post;
  for (int i = 0; i < 200; ++i) post.samples.push_back(0.1 * i + 1.0 / 3.0);
  post.requested = 250;
  post.rejected = 40;
  post.discarded = 10;
  post.stage2_ess = 123.456;
  post.config = config();
  const auto rep = make_report(post, manifest());
  CHECK(rep.truncation == 25);
  CHECK(rep.summary.accepted == 200);
  const auto text = to_json(rep);
  const auto back = estimate_from_json(text);
  CHECK(back == rep);
  CHECK(to_json(back) == text);
  for (const char* key : {"\"gamma_mean\"", "\"gamma_ci95\"", "\"rejected\"", "\"config\"", "\"manifest\""}) {
    CHECK(text.find(key) != std::string::npos);
  }
}

TEST_CASE("coverage report round trip and finalize") {
  CoverageReport rep;
  rep.scenario = "data/scenarios/lorentzian_8.txt";
  rep.truth = 17.12;
  rep.config = config();
  rep.manifest = manifest();
  rep.rows.push_back({0, 1, 2, true, 17.0, 10.0, 20.0, true, 3, ""});
  rep.rows.push_back({1, 3, 4, true, 30.0, 25.0, 40.0, false, 0, ""});
  rep.rows.push_back({2, 5, 6, false, 0.0, 0.0, 0.0, false, 0, "all 2000 mean-width draws were invalid"});
  finalize(rep);
  CHECK(rep.coverage == doctest::Approx(1.0 / 3.0));
  CHECK(rep.mean_width == doctest::Approx(12.5));
  const auto text = to_json(rep);
  CHECK(coverage_from_json(text) == rep);
  CHECK(text.find("\"true_mean_gamma\"") != std::string::npos);
}

TEST_CASE("malformed JSON is reported") {
  CHECK_THROWS(estimate_from_json("{\"gamma_mean\": 1"));
  CHECK_THROWS(estimate_from_json("{}"));
}

TEST_CASE("timestamps are ISO 8601 UTC") {
  CHECK(std::regex_match(utc_timestamp(), std::regex(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)")));
}

TEST_CASE("text files: write, read, and errors naming the path") {
  const auto dir = std::filesystem::temp_directory_path() / "linewidth_report_test";
  std::filesystem::create_directories(dir);
  write_text(dir / "a.txt", "hello\n");
  CHECK(read_text(dir / "a.txt") == "hello\n");
  try {
    read_text(dir / "missing.txt");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("missing.txt") != std::string::npos);
  }
  CHECK_THROWS_AS(write_text(dir / "no" / "such" / "dir" / "x.txt", "x"), IoError);
  std::filesystem::remove_all(dir);
}
