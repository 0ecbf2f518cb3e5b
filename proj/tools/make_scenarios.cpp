// Regenerates the benchmark scenario files in data/scenarios.
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "linewidth/lineshape.hpp"
#include "linewidth/scenario_io.hpp"

using namespace linewidth;

namespace {

// Six pseudo-Voigt bands whose area-weighted Lorentzian half width is exactly
// `target`. Areas and locations follow the benchmark sampler; widths come from
// a separate stream and are shifted onto the target.
Scenario voigt_scenario(std::uint64_t seed, const GridSpec& grid, double target) {
  Scenario sc = sample_scenario(ScenarioKind::voigt, 6, seed, grid);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hwhm(25.0, 42.0), sigma(5.0, 15.0);
  auto& p = sc.params;
  for (std::size_t m = 0; m < p.size(); ++m) {
    p.lorentz_widths[m] = hwhm(rng);
    p.gauss_widths[m] = sigma(rng);
  }
  const double shift = target - true_mean_gamma(p);
  for (auto& g : p.lorentz_widths) g += shift;
  const auto clean = band_sum(p, grid.make());
  sc.noise.sigma_epsilon = 0.05 * *std::max_element(clean.begin(), clean.end());
  return sc;
}

// Two well separated groups of Lorentzian bands for region-selection demos.
Scenario two_clusters() {
  Scenario sc;
  sc.kind = ScenarioKind::lorentzian;
  sc.params = {{10.0, 8.0, 12.0, 15.0, 10.0, 12.0},
               {1100.0, 1130.0, 1160.0, 1480.0, 1520.0, 1560.0},
               {6.0, 7.0, 8.0, 14.0, 16.0, 18.0},
               {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}};
  sc.grid = GridSpec{950.0, 1750.0, 512};
  const auto clean = band_sum(sc.params, sc.grid.make());
  sc.noise = {0.02 * *std::max_element(clean.begin(), clean.end()), 5};
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Write the lorentzian, gaussian and voigt benchmark scenarios"};
  std::filesystem::path out = "data/scenarios";
  GridSpec grid{1150.0, 2150.0, 512};
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--lo", grid.lo, "Grid start")->capture_default_str();
  app.add_option("--hi", grid.hi, "Grid end")->capture_default_str();
  app.add_option("--points", grid.points, "Grid size")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out);
  const std::pair<std::string, Scenario> files[] = {
      {"lorentzian_8.txt", sample_scenario(ScenarioKind::lorentzian, 8, 2427, grid)},
      {"gaussian_10.txt", sample_scenario(ScenarioKind::gaussian, 10, 1, grid)},
      {"voigt_6.txt", voigt_scenario(3350, grid, 33.5)},
      {"two_clusters.txt", two_clusters()},
  };
  for (const auto& [name, sc] : files) {
    save_scenario(out / name, sc);
    std::cout << name << ": true mean gamma = " << true_mean_gamma(sc.params) << "\n";
  }
  return 0;
}
