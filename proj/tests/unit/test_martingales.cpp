#include <doctest.h>

#include "fluctlab/densities.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/martingales.hpp"

#include <cmath>
#include <vector>

using namespace fluctlab::particles;
using namespace fluctlab::scenario;
using namespace fluctlab::meanfield;

namespace {

// A small known scene: two particles, gaussian background density, one bump
// test function, everything on a coarse grid.
struct Scene {
  Grid grid{1, 64, 8.0};
  SpectralTransform tr{Grid{1, 64, 8.0}};
  DensityField rho;
  ParticleEnsemble ens;
  TestFunction phi = make_bump_phi(1, 3.0, {0.0}, 1.0);

  Scene() {
    const auto spec = make_gaussian_density(1, {0.0}, 0.8);
    rho = DensityField(grid, spec.grid_values(grid), tr);
    ens.N = 2;
    ens.d = 1;
    ens.L = 8.0;
    ens.t = 0.0;
    ens.X = {-0.7, 1.1};
  }

  double quad_mean(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (int c = 0; c < grid.M; ++c)
      acc += f(grid.node(c)) * rho.values[c] * grid.cell_volume();
    return acc;
  }

  double dphi(double x) const {
    double g;
    phi.gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
    return g;
  }
};

}  // namespace

TEST_CASE("ledger starts at zero with the time origin") {
  const auto sigma = make_scaled_identity_coeff(1, 0.5);
  const auto nu = make_scaled_identity_coeff(1, 0.25);
  MartingaleAccumulator acc({make_bump_phi(1, 2.0, {0.0}, 1.0)}, sigma, nu);
  const auto& led = acc.ledger();
  REQUIRE(led.n_phi() == 1);
  CHECK(led.series[0].M == std::vector<double>{0.0});
  CHECK(led.series[0].Mhat == std::vector<double>{0.0});
  CHECK(led.series[0].Q == std::vector<double>{0.0});
  CHECK(led.times == std::vector<double>{0.0});
  CHECK(led.predictor(0, 0) == 0.0);
}

TEST_CASE("one step reproduces the hand-computed increments") {
  Scene sc;
  const double s = 0.7, v = 0.4, dt = 0.01;
  const auto sigma = make_scaled_identity_coeff(1, s);
  const auto nu = make_scaled_identity_coeff(1, v);
  MartingaleAccumulator acc({sc.phi}, sigma, nu);

  const std::vector<double> dB = {0.05, -0.02};
  const std::vector<double> dW = {0.03};
  acc.accumulate(sc.ens, sc.rho, dB, dW, dt);
  const auto& led = acc.ledger();

  const double g0 = sc.dphi(sc.ens.X[0]);
  const double g1 = sc.dphi(sc.ens.X[1]);
  const double rt2 = std::sqrt(2.0);

  // Idiosyncratic martingale: (1/sqrt N) sum_i sigma phi'(X_i) dB_i.
  const double M1 = (s * g0 * dB[0] + s * g1 * dB[1]) / rt2;
  CHECK(led.series[0].M[1] == doctest::Approx(M1).epsilon(1e-13));

  // Quadratic variation: (dt/N) sum_i (sigma phi'(X_i))^2.
  const double Q1 = dt * (s * s * g0 * g0 + s * s * g1 * g1) / 2.0;
  CHECK(led.series[0].Q[1] == doctest::Approx(Q1).epsilon(1e-13));

  // Common-noise martingale: sqrt(N) <nu phi', mu^N - rho> dW.
  const double emp = v * (g0 + g1) / 2.0;
  const double mod = sc.quad_mean([&](double x) { return v * sc.dphi(x); });
  const double Mhat1 = rt2 * (emp - mod) * dW[0];
  CHECK(led.series[0].Mhat[1] == doctest::Approx(Mhat1).epsilon(1e-12));

  // Predictor: dt <(sigma phi')^2, rho> by independent quadrature.
  const double pred =
      dt * sc.quad_mean([&](double x) { return s * s * sc.dphi(x) * sc.dphi(x); });
  CHECK(led.predictor(0, 0) == doctest::Approx(pred).epsilon(1e-12));
  CHECK(led.times == std::vector<double>{0.0, dt});
}

TEST_CASE("increments add across steps and Q never decreases") {
  Scene sc;
  const auto sigma = make_scaled_identity_coeff(1, 0.6);
  const auto nu = make_scaled_identity_coeff(1, 0.3);
  MartingaleAccumulator acc({sc.phi}, sigma, nu);
  GaussianStream g(11);
  std::vector<double> dB(2), dW(1);
  for (int step = 0; step < 6; ++step) {
    g.normal_fill(dB, 0.1);
    dW[0] = 0.1 * g.normal();
    acc.accumulate(sc.ens, sc.rho, dB, dW, 0.01);
    sc.ens.t += 0.01;
    sc.ens.X[0] += 0.05;  // move the scene so increments differ
  }
  const auto& led = acc.ledger();
  REQUIRE(led.times.size() == 7);
  for (std::size_t k = 1; k < led.series[0].Q.size(); ++k)
    CHECK(led.series[0].Q[k] >= led.series[0].Q[k - 1]);
  CHECK(led.predictor(0, 0) > 0.0);
}

TEST_CASE("zero common coefficient freezes Mhat; zero sigma freezes M and Q") {
  Scene sc;
  const std::vector<double> dB = {0.2, -0.1};
  const std::vector<double> dW = {0.5};

  MartingaleAccumulator no_common({sc.phi}, make_scaled_identity_coeff(1, 0.8),
                                  make_scaled_identity_coeff(1, 0.0));
  no_common.accumulate(sc.ens, sc.rho, dB, dW, 0.01);
  CHECK(no_common.ledger().series[0].Mhat[1] == 0.0);
  CHECK(no_common.ledger().series[0].M[1] != 0.0);

  MartingaleAccumulator no_idio({sc.phi}, make_scaled_identity_coeff(1, 0.0),
                                make_scaled_identity_coeff(1, 0.4));
  no_idio.accumulate(sc.ens, sc.rho, dB, dW, 0.01);
  CHECK(no_idio.ledger().series[0].M[1] == 0.0);
  CHECK(no_idio.ledger().series[0].Q[1] == 0.0);
  CHECK(no_idio.ledger().series[0].Mhat[1] != 0.0);
}

TEST_CASE("cross predictor is symmetric and matches quadrature") {
  Scene sc;
  const double s = 0.9, dt = 0.02;
  const auto phi2 = make_windowed_monomial(1, 0, 1, 3.5, {0.0}, 1.0, "xw");
  MartingaleAccumulator acc({sc.phi, phi2}, make_scaled_identity_coeff(1, s),
                            make_scaled_identity_coeff(1, 0.0));
  const std::vector<double> dB = {0.0, 0.0};
  acc.accumulate(sc.ens, sc.rho, dB, {}, dt);
  const auto& led = acc.ledger();

  auto dphi2 = [&](double x) {
    double g;
    phi2.gradient(std::span<const double>(&x, 1), std::span<double>(&g, 1));
    return g;
  };
  const double pred01 = dt * sc.quad_mean([&](double x) {
    return s * s * sc.dphi(x) * dphi2(x);
  });
  CHECK(led.predictor(0, 1) == doctest::Approx(pred01).epsilon(1e-12));
  CHECK(led.predictor(1, 0) == doctest::Approx(led.predictor(0, 1)).epsilon(1e-15));
}

TEST_CASE("space-dependent sigma is evaluated at each particle") {
  Scene sc;
  // sigma(t, x) = 0.5 * (1 + 0.3 sin(x)); evaluated pointwise, not frozen at
  // the first particle.
  const auto sigma = make_perturbed_coeff(1, 1, {0.5}, 0.3, {1.0}, 0.0);
  MartingaleAccumulator acc({sc.phi}, sigma, make_scaled_identity_coeff(1, 0.0));
  const std::vector<double> dB = {0.04, 0.07};
  const double dt = 0.01;
  acc.accumulate(sc.ens, sc.rho, dB, {}, dt);

  auto sig_at = [&](double x) { return 0.5 * (1.0 + 0.3 * std::sin(x)); };
  const double rt2 = std::sqrt(2.0);
  const double M1 = (sig_at(sc.ens.X[0]) * sc.dphi(sc.ens.X[0]) * dB[0] +
                     sig_at(sc.ens.X[1]) * sc.dphi(sc.ens.X[1]) * dB[1]) /
                    rt2;
  CHECK(acc.ledger().series[0].M[1] == doctest::Approx(M1).epsilon(1e-12));

  const double pred = dt * sc.quad_mean([&](double x) {
    const double sg = sig_at(x) * sc.dphi(x);
    return sg * sg;
  });
  CHECK(acc.ledger().predictor(0, 0) == doctest::Approx(pred).epsilon(1e-12));
}
