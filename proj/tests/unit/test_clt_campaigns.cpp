#include <doctest.h>

#include "fluctlab/clt_campaigns.hpp"

#include <cmath>
#include <stdexcept>

using namespace fluctlab::statlab;
using namespace fluctlab::scenario;

namespace {

ScenarioConfig martingale_config() {
  ScenarioConfig cfg;
  cfg.d = 1;
  cfg.N_list = {400};
  cfg.T = 0.05;
  cfg.n_steps = 5;
  cfg.L = 8.0;
  cfg.M = 64;
  cfg.R = 60;
  cfg.seed = 11;
  cfg.kernel = make_zero_kernel(1);
  cfg.sigma = make_scaled_identity_coeff(1, 0.6);
  cfg.nu = make_scaled_identity_coeff(1, 0.25);
  cfg.rho0 = make_gaussian_density(1, {0.0}, 0.7);
  TestFunctionSpec bump;
  bump.name = "bump0";
  bump.kind = "bump";
  bump.radius = 2.0;
  bump.center = {0.0};
  TestFunctionSpec mono;
  mono.name = "xw";
  mono.kind = "monomial";
  mono.axis = 0;
  mono.power = 1;
  mono.radius = 3.5;
  cfg.phis = {bump, mono};
  return cfg;
}

}  // namespace

TEST_CASE("the martingale campaign matches its model quadratic variation") {
  const auto cfg = martingale_config();
  const auto res = martingale_campaign(cfg, 1);
  CHECK(res.N == 400);
  CHECK(res.R == 60);
  CHECK(res.T == doctest::Approx(0.05));
  REQUIRE(res.phi_names == std::vector<std::string>{"bump0", "xw"});
  for (const auto* field : {&res.M, &res.Mhat, &res.Mmid, &res.Q}) {
    REQUIRE(field->size() == 2);
    for (const auto& row : *field) REQUIRE(row.size() == 60);
  }
  REQUIRE(res.predictor.size() == 4);
  CHECK(res.predictor_at(0, 1) ==
        doctest::Approx(res.predictor_at(1, 0)).epsilon(1e-12));

  for (int p = 0; p < 2; ++p) {
    for (double q : res.Q[p]) CHECK(q > 0.0);
    // Mean quadratic variation tracks the model predictor diagonal.
    const double meanQ = sample_mean(res.Q[p]);
    CHECK(meanQ == doctest::Approx(res.predictor_at(p, p)).epsilon(0.15));
    // Martingales are centered.
    CHECK(std::abs(sample_mean(res.M[p])) <= 5.0 * mean_se(res.M[p]));
  }
}

TEST_CASE("martingale campaigns are thread-count deterministic") {
  const auto cfg = martingale_config();
  const auto a = martingale_campaign(cfg, 1);
  const auto b = martingale_campaign(cfg, 2);
  CHECK(a.M == b.M);
  CHECK(a.Mhat == b.Mhat);
  CHECK(a.Q == b.Q);
  CHECK(a.predictor == b.predictor);
}

TEST_CASE("covariance checks compare empirical covariances to the predictor") {
  const auto res = martingale_campaign(martingale_config(), 1);
  const auto checks = covariance_checks(res);
  REQUIRE(checks.size() == 3);  // (0,0), (0,1), (1,1)
  CHECK(checks[0].name_a == "bump0");
  CHECK(checks[1].name_b == "xw");
  for (const auto& c : checks) {
    CHECK(c.empirical ==
          doctest::Approx(sample_covariance(res.M[c.a], res.M[c.b]))
              .epsilon(1e-12));
    CHECK(c.predicted == doctest::Approx(res.predictor_at(c.a, c.b)));
    const bool expect = std::abs(c.empirical - c.predicted) <=
                        std::max(4.0 * c.se, 0.10 * std::abs(c.predicted));
    CHECK(c.pass == expect);
    CHECK(c.pass);  // healthy configuration: the identity holds
  }
}

TEST_CASE("the two noise martingales are empirically orthogonal") {
  const auto res = martingale_campaign(martingale_config(), 1);
  const auto checks = cross_term_check(res);
  REQUIRE(checks.size() == 2);
  for (const auto& c : checks) {
    CHECK(std::abs(c.mean_product) <= 4.0 * c.se_product);
    CHECK(std::abs(c.mean_increment) <= 4.0 * c.se_increment);
    CHECK(c.pass);
  }
}

TEST_CASE("switching off a noise source freezes its martingale") {
  auto cfg = martingale_config();
  cfg.R = 10;
  cfg.nu = make_scaled_identity_coeff(1, 0.0);
  const auto no_common = martingale_campaign(cfg, 1);
  for (const auto& row : no_common.Mhat)
    for (double v : row) CHECK(v == 0.0);
  for (const auto& row : no_common.Mmid)
    for (double v : row) CHECK(v == 0.0);
  // All-zero products short-circuit the orthogonality check to a pass.
  for (const auto& c : cross_term_check(no_common)) CHECK(c.pass);

  cfg = martingale_config();
  cfg.R = 10;
  cfg.sigma = make_scaled_identity_coeff(1, 0.0);
  const auto no_idio = martingale_campaign(cfg, 1);
  for (const auto& row : no_idio.M)
    for (double v : row) CHECK(v == 0.0);
  for (const auto& row : no_idio.Q)
    for (double v : row) CHECK(v == 0.0);
  for (const auto& c : covariance_checks(no_idio)) {
    CHECK(c.empirical == 0.0);
    CHECK(c.predicted == 0.0);
    CHECK(c.pass);
  }
}

TEST_CASE("the conditional CLT experiment refuses tiny replica counts") {
  auto cfg = martingale_config();
  cfg.R = 499;
  CHECK_THROWS_AS(conditional_clt(cfg, 1), std::invalid_argument);
}

TEST_CASE("conditional CLT statistics match the conditional Gaussian limit") {
  ScenarioConfig cfg;
  cfg.d = 1;
  cfg.N_list = {500};
  cfg.T = 0.05;
  cfg.n_steps = 4;
  cfg.L = 8.0;
  cfg.M = 64;
  cfg.R = 500;
  cfg.seed = 7;
  cfg.kernel = make_zero_kernel(1);
  cfg.sigma = make_scaled_identity_coeff(1, 0.5);
  cfg.nu = make_scaled_identity_coeff(1, 0.3);
  cfg.rho0 = make_gaussian_density(1, {0.0}, 0.8);
  TestFunctionSpec bump;
  bump.name = "bump0";
  bump.kind = "bump";
  bump.radius = 2.0;
  bump.center = {0.0};
  cfg.phis = {bump};

  const auto report = conditional_clt(cfg, 1);
  CHECK(report.N == 500);
  CHECK(report.R == 500);
  REQUIRE(report.phis.size() == 1);
  const auto& pr = report.phis[0];
  CHECK(pr.phi_name == "bump0");
  REQUIRE(pr.particle.size() == 500);
  REQUIRE(pr.spde.size() == 500);

  // Dual density routes: spectral solver vs closed-form shifted Gaussian.
  CHECK(pr.var_analytic > 0.0);
  REQUIRE(std::isfinite(pr.var_quadrature));
  CHECK(pr.var_quadrature ==
        doctest::Approx(pr.var_analytic).epsilon(1e-6));

  CHECK(std::abs(pr.mean_particle) <= 5.0 * pr.mean_particle_se);
  CHECK(pr.var_particle ==
        doctest::Approx(pr.var_analytic).epsilon(0.25));
  CHECK(pr.var_spde == doctest::Approx(pr.var_analytic).epsilon(0.25));

  for (const auto* ks : {&pr.ks_particle, &pr.ks_spde, &pr.ks_two_sample}) {
    CHECK(ks->statistic >= 0.0);
    CHECK(ks->p_value >= 0.0);
    CHECK(ks->p_value <= 1.0);
  }
  CHECK(pr.ks_particle.p_value > 0.01);
  CHECK(pr.ks_spde.p_value > 0.01);
  CHECK(pr.ks_two_sample.p_value > 0.01);
}
