#include <doctest.h>

#include "fluctlab/campaigns.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

using namespace fluctlab::statlab;
using namespace fluctlab::scenario;
using namespace fluctlab::meanfield;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig cfg;
  cfg.d = 1;
  cfg.N_list = {20, 40, 80};
  cfg.T = 0.05;
  cfg.n_steps = 4;
  cfg.L = 8.0;
  cfg.M = 64;
  cfg.Xi = 16.0;
  cfg.M_f = 64;
  cfg.alpha = 1.0;
  cfg.alpha_interaction = 2.6;
  cfg.R = 4;
  cfg.seed = 3;
  cfg.kernel = make_gaussian_kernel(1, 0.5, 1.0);
  cfg.sigma = make_scaled_identity_coeff(1, 0.5);
  cfg.nu = make_scaled_identity_coeff(1, 0.5);
  cfg.rho0 = make_gaussian_density(1, {0.0}, 0.5);
  TestFunctionSpec phi;
  phi.name = "bump0";
  phi.kind = "bump";
  phi.radius = 2.0;
  phi.center = {0.0};
  cfg.phis = {phi};
  return cfg;
}

}  // namespace

TEST_CASE("the convergence sweep produces a full grid of observations") {
  const auto cfg = small_config();
  const auto sweep = convergence_sweep(cfg, 1);
  REQUIRE(sweep.N_list == cfg.N_list);
  CHECK(sweep.t_final == doctest::Approx(cfg.T));
  REQUIRE(sweep.plain_sq.size() == 3);
  for (const auto& field :
       {sweep.plain_sq, sweep.plain_residual, sweep.inter_sq,
        sweep.inter_residual, sweep.bilinear})
    for (const auto& inner : field) CHECK(inner.size() == 4);
  for (const auto& inner : sweep.plain_sq)
    for (double v : inner) CHECK(v > 0.0);
  for (const auto& inner : sweep.plain_residual)
    for (double v : inner) CHECK(v > 0.0);
  for (const auto& inner : sweep.inter_sq)
    for (double v : inner) CHECK(v >= 0.0);

  const auto rows = sweep_samples(sweep);
  REQUIRE(rows.size() == 3u * 3u * 4u);
  CHECK(rows[0].source_tag == "plain_difference");
  CHECK(rows[12].source_tag == "interaction_difference");
  CHECK(rows[24].source_tag == "bilinear_pairing");
  CHECK(rows[0].N == 20);
  CHECK(rows[0].alpha == doctest::Approx(1.0));
  CHECK(rows[12].alpha == doctest::Approx(2.6));
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
  const auto cfg = small_config();
  const auto a = convergence_sweep(cfg, 1);
  const auto b = convergence_sweep(cfg, 3);
  CHECK(a.plain_sq == b.plain_sq);
  CHECK(a.inter_sq == b.inter_sq);
  CHECK(a.bilinear == b.bilinear);
}

TEST_CASE("sweeps and moments validate their inputs") {
  auto cfg = small_config();
  cfg.N_list = {20, 20, 20};
  CHECK_THROWS_AS(convergence_sweep(cfg, 1), std::invalid_argument);
  cfg = small_config();
  cfg.phis.clear();
  CHECK_THROWS_AS(convergence_sweep(cfg, 1), std::invalid_argument);

  const auto sweep = convergence_sweep(small_config(), 1);
  CHECK_THROWS_AS(moment_from_sweep(sweep, NormKind::Plain, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(moment_from_sweep(sweep, NormKind::Interaction, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(moment_from_sweep(sweep, NormKind::Bilinear, 4),
                  std::invalid_argument);
}

TEST_CASE("moment reduction aggregates the sweep correctly") {
  const auto sweep = convergence_sweep(small_config(), 1);
  const auto m2 = moment_from_sweep(sweep, NormKind::Plain, 2);
  CHECK(m2.kind == NormKind::Plain);
  CHECK(m2.p == 2);
  CHECK(m2.alpha == doctest::Approx(1.0));
  REQUIRE(m2.N_list == std::vector<int>{20, 40, 80});
  REQUIRE(m2.moment.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    // E[norm^2] is the mean of the recorded squared norms.
    double acc = 0.0;
    for (double v : sweep.plain_sq[i]) acc += v;
    CHECK(m2.moment[i] == doctest::Approx(acc / 4.0).epsilon(1e-13));
    CHECK(m2.scaled[i] ==
          doctest::Approx(m2.moment[i] * m2.N_list[i]).epsilon(1e-13));
    CHECK(m2.moment_se[i] >= 0.0);
  }
  CHECK(std::isfinite(m2.fit.slope));
  CHECK(std::abs(m2.scaled_trend_rho) <= 1.0);

  const auto m4 = moment_from_sweep(sweep, NormKind::Plain, 4);
  double acc4 = 0.0;
  for (double v : sweep.plain_sq[0]) acc4 += v * v;
  CHECK(m4.moment[0] == doctest::Approx(acc4 / 4.0).epsilon(1e-13));

  const auto b1 = moment_from_sweep(sweep, NormKind::Bilinear, 1);
  double accb = 0.0;
  for (double v : sweep.bilinear[0]) accb += std::abs(v);
  CHECK(b1.moment[0] == doctest::Approx(accb / 4.0).epsilon(1e-13));
}

TEST_CASE("the Bessel-weight L1 norms hit their closed forms") {
  CHECK(bessel_l1_norm(1, 1.0) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(bessel_l1_norm(1, 2.0) ==
        doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-12));
  CHECK(bessel_l1_norm(2, 2.0) == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK_THROWS_AS(bessel_l1_norm(1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(bessel_l1_norm(2, 1.0), std::invalid_argument);
}

TEST_CASE("exponential-moment campaigns enforce their smallness gates") {
  auto cfg = small_config();
  cfg.elln.samples = 2000;
  cfg.elln.N_list = {8, 16, 32};
  cfg.elln.kappa = 1.0;
  cfg.elln.phi_sup = 1.0;  // e^9 kappa sup^2 >> 1
  cfg.elln.p_list = {2};
  CHECK_THROWS_WITH_AS(elln_campaign(cfg, 1),
                       doctest::Contains("smallness condition"),
                       std::invalid_argument);

  cfg.elln.phi_sup = 0.01;
  cfg.elln.p_list = {3};
  CHECK_THROWS_AS(elln_campaign(cfg, 1), std::invalid_argument);
  cfg.elln.p_list = {2};
  cfg.elln.samples = 50;
  CHECK_THROWS_AS(elln_campaign(cfg, 1), std::invalid_argument);
}

TEST_CASE("exponential-moment estimates stay below the closed-form bound") {
  auto cfg = small_config();
  cfg.elln.samples = 2000;
  cfg.elln.N_list = {8, 16, 32};
  cfg.elln.kappa = 1.0;
  cfg.elln.phi_sup = 0.01;
  cfg.elln.p_list = {2, 4};
  const auto results = elln_campaign(cfg, 1);
  REQUIRE(results.size() == 2);

  const auto& r2 = results[0];
  CHECK(r2.p == 2);
  CHECK(r2.kappa == doctest::Approx(1.0));
  CHECK(r2.phi_sup <= 0.011);  // realized sup respects the target
  REQUIRE(r2.estimate.size() == 3);
  CHECK(std::isfinite(r2.bound));
  CHECK(r2.bound > 0.0);
  for (double e : r2.estimate) {
    CHECK(e >= 0.0);
    CHECK(e <= r2.bound);
  }
  CHECK(r2.below_bound);
  // alpha0/beta0 reconstruct the bound: log(1 + a/(1-a) + b/(1-b)).
  const double want = std::log(1.0 + r2.alpha0 / (1.0 - r2.alpha0) +
                               r2.beta0 / (1.0 - r2.beta0));
  CHECK(r2.bound == doctest::Approx(want).epsilon(1e-12));

  const auto& r4 = results[1];
  CHECK(r4.p == 4);
  CHECK(std::isnan(r4.bound));
  REQUIRE(r4.estimate.size() == 3);
  for (double e : r4.estimate) CHECK(e >= 0.0);

  // Same seed, different thread counts: identical estimates.
  const auto again = elln_campaign(cfg, 2);
  CHECK(again[0].estimate == r2.estimate);
  CHECK(again[1].estimate == r4.estimate);
}

TEST_CASE("the marginal divergence flags mismatched densities, not matched ones") {
  const Grid grid(1, 256, 8.0);
  const SpectralTransform tr(grid);
  const auto spec = make_gaussian_density(1, {0.0}, 0.8);
  const DensityField self(grid, spec.grid_values(grid), tr);
  const auto shifted_spec = make_gaussian_density(1, {1.5}, 0.8);
  const DensityField shifted(grid, shifted_spec.grid_values(grid), tr);

  GaussianStream gs(9);
  std::vector<double> xs(100000);
  spec.sample(100000, 8.0, gs, xs);

  CHECK_THROWS_AS(marginal_kl(xs, 5000, 1, self), std::invalid_argument);

  const auto good = marginal_kl(xs, 100000, 1, self);
  CHECK(good.pooled == 100000);
  CHECK(good.bins > 10);
  CHECK(good.kl < 0.01);

  const auto bad = marginal_kl(xs, 100000, 1, shifted);
  CHECK(bad.kl > 5.0 * std::max(good.kl, 1e-4));

  const auto uspec = make_uniform_density(1, 2.0);
  const DensityField ufield(grid, uspec.grid_values(grid), tr);
  std::vector<double> us(100000);
  uspec.sample(100000, 8.0, gs, us);
  CHECK(marginal_kl(us, 100000, 1, ufield).kl < 0.01);
}

TEST_CASE("entropy campaigns pool replicas against the common-noise target") {
  auto cfg = small_config();
  cfg.kernel = make_zero_kernel(1);
  cfg.N_list = {2500, 5000};
  const auto results = entropy_campaign(cfg, 1);
  REQUIRE(results.size() == 2);
  CHECK(results[0].N == 2500);
  CHECK(results[0].pooled == 10000);
  CHECK(results[1].pooled == 20000);
  for (const auto& r : results) {
    CHECK(r.bins > 5);
    CHECK(r.kl >= 0.0);
    CHECK(r.kl < 0.1);  // matched dynamics stay close to the field marginal
  }

  auto small_pool = small_config();
  small_pool.kernel = make_zero_kernel(1);
  CHECK_THROWS_AS(entropy_campaign(small_pool, 1), std::invalid_argument);
}

TEST_CASE("increment campaigns validate lags and produce growing moments") {
  auto cfg = small_config();
  cfg.increments.lag_fractions = {0.3, 0.5, 1.0};
  CHECK_THROWS_WITH_AS(increment_campaign(cfg, 1),
                       doctest::Contains("whole number"), std::invalid_argument);
  cfg.increments.lag_fractions = {0.5, 1.0};
  CHECK_THROWS_AS(increment_campaign(cfg, 1), std::invalid_argument);
  cfg.increments.lag_fractions = {0.25, 0.5, 1.0};
  cfg.alpha_interaction = 2.0;  // at or below d/2 + 2
  CHECK_THROWS_AS(increment_campaign(cfg, 1), std::invalid_argument);

  cfg = small_config();
  cfg.increments.lag_fractions = {0.25, 0.5, 1.0};
  const auto res = increment_campaign(cfg, 1);
  CHECK(res.N == 80);
  CHECK(res.alpha == doctest::Approx(2.6));
  REQUIRE(res.lags.size() == 3);
  CHECK(res.lags[0] == doctest::Approx(cfg.T / 4.0));
  CHECK(res.lags[2] == doctest::Approx(cfg.T));
  REQUIRE(res.fourth_moment.size() == 3);
  for (double m : res.fourth_moment) CHECK(m > 0.0);
  CHECK(res.fourth_moment.back() > res.fourth_moment.front());
  CHECK(res.samples.size() == 3u * 4u);
  CHECK(res.samples[0].source_tag == "increment");
  CHECK(std::isfinite(res.fit.slope));
}
