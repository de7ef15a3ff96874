#include <doctest.h>

#include "fluctlab/densities.hpp"
#include "fluctlab/grid.hpp"
#include "fluctlab/rng.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace fluctlab::scenario;
using fluctlab::meanfield::Grid;

TEST_CASE("gaussian density: closed form and box mass") {
  const auto rho = make_gaussian_density(1, {0.0}, 0.5);
  const double L = 8.0;
  // sd = 0.5 inside [-8, 8): essentially full mass.
  CHECK(rho.box_mass(L) == doctest::Approx(1.0).epsilon(1e-12));
  const double Z = rho.box_mass(L);
  for (double x : {-1.0, 0.0, 0.3, 2.0}) {
    const double pdf = std::exp(-x * x / (2.0 * 0.25)) /
                       (0.5 * std::sqrt(2.0 * std::numbers::pi));
    CHECK(rho.density(std::vector<double>{x}, L) ==
          doctest::Approx(pdf / Z).epsilon(1e-12));
  }
}

TEST_CASE("uniform density integrates to one and is flat") {
  const auto rho = make_uniform_density(1, 2.0);
  CHECK(rho.density(std::vector<double>{0.0}, 8.0) == doctest::Approx(0.25));
  CHECK(rho.density(std::vector<double>{1.99}, 8.0) == doctest::Approx(0.25));
  CHECK(rho.density(std::vector<double>{2.01}, 8.0) == 0.0);
}

TEST_CASE("grid values have exact unit grid mass") {
  const Grid grid(1, 128, 8.0);
  const auto rho = make_gaussian_density(1, {0.3}, 0.7);
  const auto v = rho.grid_values(grid);
  double mass = 0.0;
  for (double x : v) mass += x;
  mass *= grid.h();
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-13));

  const Grid g2(2, 32, 4.0);
  const auto rho2 = make_gaussian_density(2, {0.0, 0.5}, 0.6);
  const auto v2 = rho2.grid_values(g2);
  double mass2 = 0.0;
  for (double x : v2) mass2 += x;
  mass2 *= g2.cell_volume();
  CHECK(mass2 == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("sampling matches the truncated moments") {
  const auto rho = make_gaussian_density(1, {0.25}, 0.5);
  const double L = 8.0;
  GaussianStream gs(77);
  const int N = 100000;
  std::vector<double> X(N);
  rho.sample(N, L, gs, X);
  double mean = 0.0;
  for (double x : X) {
    mean += x;
    CHECK(x >= -L);
    CHECK(x < L);
  }
  mean /= N;
  const double expect = rho.truncated_mean(L)[0];
  CHECK(std::abs(mean - expect) < 5.0 * 0.5 / std::sqrt(double(N)));
}

TEST_CASE("two-component mixture samples in both modes") {
  const auto rho = make_mixture_density(
      1, {MixtureComponent{0.5, {-2.0}, 0.3}, MixtureComponent{0.5, {2.0}, 0.3}});
  GaussianStream gs(5);
  const int N = 20000;
  std::vector<double> X(N);
  rho.sample(N, 8.0, gs, X);
  int left = 0;
  for (double x : X)
    if (x < 0) ++left;
  // Binomial(N, 1/2): 5-sigma band.
  CHECK(std::abs(left - N / 2) < 5.0 * std::sqrt(N * 0.25));
  // Mean of the truncated mixture is 0 by symmetry.
  CHECK(rho.truncated_mean(8.0)[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("density validation rejects broken specs") {
  auto far = make_gaussian_density(1, {100.0}, 0.1);
  CHECK_THROWS(far.box_mass(8.0));
  auto rho = make_gaussian_density(1, {0.0}, 0.5);
  CHECK_NOTHROW(rho.validate(8.0));
}
