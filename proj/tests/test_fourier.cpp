#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "linewidth/errors.hpp"
#include "linewidth/fourier.hpp"
#include "linewidth/lineshape.hpp"
#include "oracles.hpp"

using namespace linewidth;
using namespace linewidth::fourier;
using doctest::Approx;

namespace {

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(1.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

std::vector<double> lorentz_on(std::span<const double> grid, double area, double centre, double hwhm) {
  std::vector<double> v;
  for (double x : grid) v.push_back(area * lorentzian(x - centre, hwhm));
  return v;
}

}  // namespace

TEST_CASE("fft magnitudes match the direct transform") {
  for (std::size_t n : {8u, 9u, 64u, 101u, 512u}) {
    const auto v = random_series(n, n);
    const auto f = fft_magnitude(v, 0.4);
    const auto o = oracle::dft_magnitude(v, 0.4);
    REQUIRE(f.magnitudes.size() == n);
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(f.magnitudes[k] - o[k]));
    CHECK(err < 1e-9 * static_cast<double>(n));
    CHECK(f.frequencies[1] == Approx(1.0 / (static_cast<double>(n) * 0.4)));
  }
}

TEST_CASE("parseval, DC bin and mirror symmetry") {
  const std::size_t n = 256;
  const double dnu = 0.7;
  const auto v = random_series(n, 3);
  const auto f = fft_magnitude(v, dnu);
  double energy = 0.0, total = 0.0, spectral = 0.0;
  for (double x : v) {
    energy += x * x;
    total += x;
  }
  for (double m : f.magnitudes) spectral += m * m;
  CHECK(spectral == Approx(static_cast<double>(n) * dnu * dnu * energy).epsilon(1e-10));
  CHECK(f.magnitudes[0] == Approx(dnu * std::abs(total)).epsilon(1e-12));
  for (std::size_t k = 1; k < n; ++k) CHECK(f.magnitudes[k] == Approx(f.magnitudes[n - k]).epsilon(1e-10));
}

TEST_CASE("magnitudes ignore circular shifts") {
  const auto v = random_series(128, 4);
  auto w = v;
  std::rotate(w.begin(), w.begin() + 37, w.end());
  const auto a = fft_magnitude(v, 1.0), b = fft_magnitude(w, 1.0);
  for (std::size_t k = 0; k < 128; ++k) CHECK(a.magnitudes[k] == Approx(b.magnitudes[k]).epsilon(1e-10));
}

TEST_CASE("lorentzian magnitude decays at rate 2 pi gamma") {
  const auto grid = uniform_grid(-4000.0, 4000.0, 16384);
  const double gamma = 6.0;
  const auto f = fft_magnitude(grid, lorentz_on(grid, 3.0, 0.0, gamma));
  // The lowest bins carry the leakage of the tails cut off by the window.
  for (std::size_t k = 3; k <= 8; ++k) {
    const double rate = std::log(f.magnitudes[k] / f.magnitudes[k + 1]) / (f.frequencies[k + 1] - f.frequencies[k]);
    CHECK(rate / (2.0 * std::numbers::pi) == Approx(gamma).epsilon(0.02));
  }
  CHECK(f.magnitudes[0] == Approx(3.0).epsilon(0.01));
}

TEST_CASE("window truncation lowers the DC bin by the area outside the window") {
  const double area = 10.0, gamma = 12.0;
  double previous = 0.0;
  for (double half : {100.0, 200.0, 400.0, 800.0}) {
    const auto grid = uniform_grid(1650.0 - half, 1650.0 + half, 2048);
    const auto f = fft_magnitude(grid, lorentz_on(grid, area, 1650.0, gamma));
    const double inside = oracle::simpson([&](double x) { return area * lorentzian(x, gamma); }, -half, half, 20000);
    CHECK(f.magnitudes[0] == Approx(inside).epsilon(0.01));
    CHECK(f.magnitudes[0] < area);
    CHECK(f.magnitudes[0] > previous);
    previous = f.magnitudes[0];
  }
}

TEST_CASE("grid overload validates spacing") {
  auto grid = uniform_grid(0.0, 10.0, 11);
  const std::vector<double> v(11, 1.0);
  CHECK(fft_magnitude(grid, v).magnitudes[0] == Approx(11.0));
  grid[4] += 0.2;
  CHECK_THROWS_AS(fft_magnitude(grid, v), DomainError);
  CHECK_THROWS_AS(fft_magnitude(std::vector<double>(4, 1.0), 1.0), DomainError);
}

TEST_CASE("dataset stacks truncated magnitudes per realization") {
  std::vector<std::vector<double>> reals;
  for (std::uint64_t j = 0; j < 3; ++j) reals.push_back(random_series(64, 10 + j));
  const auto ds = build_dataset(reals, 0.5, 6);
  CHECK(ds.realizations == 3);
  CHECK(ds.truncation == 6);
  CHECK(ds.magnitudes.size() == 18);
  const auto g = ds.grid();
  REQUIRE(g.size() == 6);
  CHECK(g[0] == 0.0);
  CHECK(g[5] == Approx(5.0 / 32.0));
  CHECK(ds.max_frequency() == g[5]);
  const auto m = ds.as_matrix();
  for (std::size_t j = 0; j < 3; ++j) {
    const auto f = fft_magnitude(reals[j], 0.5);
    for (std::size_t k = 0; k < 6; ++k) {
      CHECK(m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) == f.magnitudes[k]);
    }
  }
  CHECK(ds.max_magnitude() == m.maxCoeff());

  std::ostringstream out;
  write_dataset(out, ds);
  const std::string text = out.str();
  CHECK(text.rfind("realization\tbin\txi\tmagnitude\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 19);

  CHECK_THROWS_AS(build_dataset(reals, 0.5, 65), UsageError);
  CHECK_THROWS_AS(build_dataset(reals, 0.5, 3), UsageError);
  CHECK_THROWS_AS(build_dataset({}, 0.5, 6), UsageError);
  reals[1].pop_back();
  CHECK_THROWS_AS(build_dataset(reals, 0.5, 6), UsageError);
}

TEST_CASE("point estimate of the mean width") {
  const double gamma = 4.0, z0 = 7.0;
  const auto g = gamma_estimate_from_point(z0, -2.0 * std::numbers::pi * gamma * z0);
  REQUIRE(g.has_value());
  CHECK(*g == Approx(gamma));
  CHECK(*gamma_estimate_from_point(1.0, 1.0) < 0.0);
  CHECK_FALSE(gamma_estimate_from_point(0.0, -1.0).has_value());
  CHECK_FALSE(gamma_estimate_from_point(-1.0, -1.0).has_value());
}

TEST_CASE("exponential decay gives a flat gamma curve") {
  // Draws of Z(xi) = b exp(-2 pi g xi) give -Z'/(2 pi Z) = g at every xi.
  const std::vector<double> grid{0.0, 0.01, 0.02};
  std::vector<gp::JointDraw> draws;
  for (int i = 0; i < 200; ++i) {
    const double g = 2.0 + 0.01 * i, b = 5.0;
    gp::JointDraw d{Eigen::VectorXd(3), Eigen::VectorXd(3)};
    for (int k = 0; k < 3; ++k) {
      d.values(k) = b * std::exp(-2.0 * std::numbers::pi * g * grid[static_cast<std::size_t>(k)]);
      d.derivatives(k) = -2.0 * std::numbers::pi * g * d.values(k);
    }
    draws.push_back(d);
  }
  draws.push_back({Eigen::VectorXd::Constant(3, -1.0), Eigen::VectorXd::Zero(3)});
  const auto curve = gamma_curve(grid, draws);
  CHECK(curve.excluded == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(curve.mean[k] == Approx(2.995).epsilon(1e-9));
    CHECK(curve.lower[k] <= curve.mean[k]);
    CHECK(curve.upper[k] >= curve.mean[k]);
    CHECK(curve.lower[k] > 2.0);
    CHECK(curve.upper[k] < 3.99);
  }
  std::ostringstream out;
  write_gamma_curve(out, curve);
  CHECK(out.str().rfind("xi\tmean\tlower\tupper\n", 0) == 0);
  CHECK_THROWS_AS(gamma_curve(std::vector<double>{0.1}, draws), UsageError);
}
