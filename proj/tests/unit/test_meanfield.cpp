#include <doctest.h>

#include "fluctlab/common_noise.hpp"
#include "fluctlab/densities.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/fp_solver.hpp"
#include "fluctlab/kernels.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace fluctlab::meanfield;
using namespace fluctlab::scenario;
using fluctlab::particles::CommonNoisePath;

namespace {

DensityField gaussian_field(const Grid& grid, const SpectralTransform& tr,
                            double mean, double sd) {
  const auto spec = make_gaussian_density(1, {mean}, sd);
  return DensityField(grid, spec.grid_values(grid), tr);
}

}  // namespace

TEST_CASE("density field mass and pairing quadrature") {
  const Grid grid(1, 128, 8.0);
  const SpectralTransform tr(grid);
  const auto rho = gaussian_field(grid, tr, 0.0, 0.5);
  CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-12));

  const auto phi = make_bump_phi(1, 2.0, {0.0}, 1.0, "b");
  const double via_function = pair_with(rho, phi);
  const auto tab = tabulate(grid, phi);
  const double via_table = pair_values(rho, tab.phi);
  CHECK(via_function == doctest::Approx(via_table).epsilon(1e-13));
  CHECK(via_function > 0.0);
}

TEST_CASE("pure heat step decays each mode by the exact factor") {
  const Grid grid(1, 64, 4.0);
  const auto kernel = make_zero_kernel(1);
  const auto nu = make_scaled_identity_coeff(1, 0.0);
  const double dt = 0.01;

  // sigma = sqrt(2) I: d rho = Delta rho dt, per-step factor exp(-|xi|^2 dt).
  {
    const auto sigma = make_scaled_identity_coeff(1, std::sqrt(2.0));
    const FpSolver solver(grid, kernel, sigma, nu);
    auto rho = gaussian_field(grid, solver.transform(), 0.2, 0.6);
    const auto before = rho.spectrum;
    solver.step(rho, dt, std::vector<double>{0.0});
    for (int k = 0; k < grid.M; ++k) {
      const double xi = grid.freq(k);
      const double factor = std::exp(-xi * xi * dt);
      CHECK(std::abs(rho.spectrum[k] - before[k] * factor) < 1e-12);
      CHECK(solver.implicit_factor(k, dt) ==
            doctest::Approx(factor).epsilon(1e-12));
    }
  }
  // sigma = I: the generator carries the 1/2, factor exp(-|xi|^2 dt / 2).
  {
    const auto sigma = make_scaled_identity_coeff(1, 1.0);
    const FpSolver solver(grid, kernel, sigma, nu);
    auto rho = gaussian_field(grid, solver.transform(), 0.2, 0.6);
    const auto before = rho.spectrum;
    solver.step(rho, dt, std::vector<double>{0.0});
    for (int k = 0; k < grid.M; ++k) {
      const double xi = grid.freq(k);
      CHECK(std::abs(rho.spectrum[k] -
                     before[k] * std::exp(-0.5 * xi * xi * dt)) < 1e-12);
    }
  }
}

TEST_CASE("common-noise step is an exact translation in law") {
  // nu constant, sigma = 0, k = 0: rho_t(x) = rho_0(x - nu W_t) exactly
  // (the per-step phase realizes the shift).
  const Grid grid(1, 256, 8.0);
  const auto kernel = make_zero_kernel(1);
  const auto sigma = make_scaled_identity_coeff(1, 0.0);
  const auto nu = make_scaled_identity_coeff(1, 0.5);
  const FpSolver solver(grid, kernel, sigma, nu);
  auto rho = gaussian_field(grid, solver.transform(), 0.0, 0.5);

  const int n_steps = 20;
  const double dt = 0.01;
  const auto path = CommonNoisePath::draw(n_steps, 1, dt, 123);
  for (int s = 0; s < n_steps; ++s) solver.step(rho, dt, path.increment(s));

  double W = 0.0;
  for (int s = 0; s < n_steps; ++s) W += path.increment(s)[0];
  const auto shifted = gaussian_field(grid, solver.transform(), 0.5 * W, 0.5);
  CHECK(relative_l2_error(rho.values, shifted.values) < 1e-10);
}

TEST_CASE("conditional gaussian closed form at modest scale") {
  const Grid grid(1, 256, 8.0);
  const auto kernel = make_zero_kernel(1);
  const auto sigma = make_scaled_identity_coeff(1, 0.8);
  const auto nu = make_scaled_identity_coeff(1, 0.5);
  const FpSolver solver(grid, kernel, sigma, nu);
  auto rho = gaussian_field(grid, solver.transform(), 0.0, 0.5);

  const int n_steps = 50;
  const double T = 0.1;
  const double dt = T / n_steps;
  const auto path = CommonNoisePath::draw(n_steps, 1, dt, 7);
  for (int s = 0; s < n_steps; ++s) solver.step(rho, dt, path.increment(s));

  double W = 0.0;
  for (int s = 0; s < n_steps; ++s) W += path.increment(s)[0];
  const double sd = std::sqrt(0.25 + 0.64 * T);
  const auto target = gaussian_field(grid, solver.transform(), 0.5 * W, sd);
  CHECK(relative_l2_error(rho.values, target.values) < 1e-3);
}

TEST_CASE("mass is conserved through interacting variable-coefficient steps") {
  const Grid grid(1, 128, 8.0);
  const auto kernel = make_gaussian_kernel(1, 0.5, 1.0);
  const auto sigma =
      make_perturbed_coeff(1, 1, {0.6}, 0.2, std::vector<double>{0.785398}, 0.1);
  const auto nu =
      make_perturbed_coeff(1, 1, {0.3}, 0.1, std::vector<double>{0.392699}, 0.0);
  const FpSolver solver(grid, kernel, sigma, nu);
  auto rho = gaussian_field(grid, solver.transform(), 0.0, 0.7);

  const int n_steps = 40;
  const double dt = 0.005;
  const auto path = CommonNoisePath::draw(n_steps, 1, dt, 55);
  double worst_drift = 0.0;
  for (int s = 0; s < n_steps; ++s) {
    const auto diag = solver.step(rho, dt, path.increment(s));
    worst_drift = std::max(worst_drift, diag.mass_drift);
    CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(worst_drift < 1e-8);
}

TEST_CASE("dealiased convolution equals the exact circular convolution on "
          "band-limited fields") {
  const Grid grid(1, 64, 4.0);
  const auto kernel = make_gaussian_kernel(1, 0.7, 0.9);
  const auto sigma = make_scaled_identity_coeff(1, 1.0);
  const auto nu = make_scaled_identity_coeff(1, 0.0);
  const FpSolver solver(grid, kernel, sigma, nu);
  const SpectralTransform& tr = solver.transform();

  // Band-limit a gaussian bump to |k| <= M/3 so the 2/3 mask is inert.
  auto rho = gaussian_field(grid, tr, 0.1, 0.8);
  const int keep = grid.M / 3;
  for (int k = 0; k < grid.M; ++k)
    if (std::abs(grid.centered(k)) > keep) rho.spectrum[k] = 0.0;
  tr.inverse(rho.spectrum, rho.values);

  const auto conv = solver.convolve(rho);
  REQUIRE(conv.size() == 1);

  // Oracle: periodic quadrature sum h * sum_l k(min_image(x_j - x_l)) rho_l.
  for (int j = 0; j < grid.M; ++j) {
    double acc = 0.0;
    for (int l = 0; l < grid.M; ++l) {
      const double dx = min_image(grid.node(j) - grid.node(l), grid.L);
      std::vector<double> kv(1);
      kernel.eval(std::vector<double>{dx}, kv);
      acc += kv[0] * rho.values[l];
    }
    acc *= grid.h();
    CHECK(conv[0][j] == doctest::Approx(acc).epsilon(1e-10));
  }
}

TEST_CASE("violent interaction step reports instability with a dt hint") {
  const Grid grid(1, 64, 4.0);
  const auto kernel = make_gaussian_kernel(1, 200.0, 0.5);
  const auto sigma = make_scaled_identity_coeff(1, 0.05);
  const auto nu = make_scaled_identity_coeff(1, 0.0);
  const FpSolver solver(grid, kernel, sigma, nu);
  auto rho = gaussian_field(grid, solver.transform(), 0.0, 0.3);

  bool threw = false;
  double suggested = 0.0;
  const double dt = 0.25;
  try {
    for (int s = 0; s < 10 && !threw; ++s)
      solver.step(rho, dt, std::vector<double>{0.0});
  } catch (const StabilityError& e) {
    threw = true;
    suggested = e.suggested_dt;
  }
  CHECK(threw);
  CHECK(suggested == doctest::Approx(dt / 2));
}
