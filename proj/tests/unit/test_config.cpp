#include <doctest.h>

#include "fluctlab/config.hpp"

#include <string>

using namespace fluctlab::scenario;

namespace {

const char* kFullConfig = R"(# full grammar exercise
[scenario]
d = 1
N_list = [100, 200]
T = 0.25
n_steps = 10
L = 4
M = 128
Xi = 32
M_f = 256
alpha = 1.25
alpha_interaction = 2.7
R = 6
seed = 99
stride = 5

[kernel]
variant = gaussian
amplitude = 0.4
width = 1.1

[sigma]
variant = smooth_perturbation
identity_scale = 0.8
eps = 0.2
omega = [1.0]
tau = 0.3

[nu]
variant = constant
identity_scale = 0.5

[rho0]
variant = gaussian_mixture
weights = [0.25, 0.75]
means = [-1.0, 1.0]
sds = [0.4, 0.5]

[phi:probe]
kind = monomial
axis = 0
power = 2
radius = 1.5
center = [0.5]
amplitude = 2.0

[elln]
samples = 500
N_list = [4, 8]
phi_sup = 0.02
kappa = 0.5
p_list = [2]

[increments]
lag_fractions = [0.1, 0.2, 0.5]
)";

}  // namespace

TEST_CASE("full grammar round trip") {
  const auto cfg = parse_config_text(kFullConfig, "test");
  CHECK(cfg.d == 1);
  CHECK(cfg.N_list == std::vector<int>{100, 200});
  CHECK(cfg.T == doctest::Approx(0.25));
  CHECK(cfg.n_steps == 10);
  CHECK(cfg.M == 128);
  CHECK(cfg.Xi == doctest::Approx(32.0));
  CHECK(cfg.alpha == doctest::Approx(1.25));
  CHECK(cfg.alpha_interaction == doctest::Approx(2.7));
  CHECK(cfg.R == 6);
  CHECK(cfg.seed == 99);
  CHECK(cfg.snapshot_stride == 5);
  CHECK(cfg.kernel.variant_name() == "gaussian");
  CHECK(cfg.sigma.variant_name() == "smooth_perturbation");
  CHECK(cfg.sigma.eps == doctest::Approx(0.2));
  CHECK(cfg.nu.base[0] == doctest::Approx(0.5));
  CHECK(cfg.rho0.components.size() == 2);
  CHECK(cfg.rho0.components[1].weight == doctest::Approx(0.75));
  REQUIRE(cfg.phis.size() == 1);
  CHECK(cfg.phis[0].name == "probe");
  CHECK(cfg.phis[0].power == 2);
  CHECK(cfg.elln.samples == 500);
  CHECK(cfg.elln.kappa == doctest::Approx(0.5));
  CHECK(cfg.increments.lag_fractions.size() == 3);
}

TEST_CASE("defaults fill missing sections") {
  const auto cfg = parse_config_text("[scenario]\nd = 1\n", "test");
  CHECK(cfg.kernel.is_zero());
  CHECK(cfg.sigma.base[0] == doctest::Approx(1.0));
  CHECK(cfg.nu.is_zero());
  CHECK(cfg.rho0.variant_name() == "gaussian_mixture");
  REQUIRE(cfg.phis.size() == 2);  // shipped defaults: bump + windowed monomial
  CHECK(cfg.phis[0].kind == "bump");
  CHECK(cfg.phis[1].kind == "monomial");
}

TEST_CASE("manifest JSON is byte-stable across reparses") {
  const auto a = parse_config_text(kFullConfig, "a");
  const auto b = parse_config_text(kFullConfig, "b");
  CHECK(a.manifest_json() == b.manifest_json());
  CHECK(a.manifest_json().find("\"seed_plan\"") != std::string::npos);
}

TEST_CASE("grammar errors name the offending line") {
  CHECK_THROWS_WITH_AS(parse_config_text("[scenario]\nbogus_key = 1\n", "f"),
                       doctest::Contains("bogus_key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[scenario]\nd 1\n", "f"),
                       doctest::Contains("key = value"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[nonsense]\nx = 1\n", "f"),
                       doctest::Contains("nonsense"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("x = 1\n", "f"),
                       doctest::Contains("section"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[scenario]\nd = 1\nd = 2\n", "f"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[scenario]\nN_list = [10\n", "f"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[scenario]\nT = fast\n", "f"),
                  ConfigError);
}

TEST_CASE("validation rejects inconsistent scenarios") {
  auto base = parse_config_text(kFullConfig, "test");

  auto bad = base;
  bad.alpha = 0.4;  // must exceed d/2
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.alpha_interaction = 2.0;  // must exceed d/2 + 2
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.N_list = {100, 100};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.M = 100;  // not a power of two
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.phis[0].center = {3.9};  // support pokes outside the box
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.increments.lag_fractions = {0.5, 1.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = base;
  bad.elln.p_list = {3};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("load_config reports missing files") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/path.cfg"),
                       doctest::Contains("cannot open"), ConfigError);
}

TEST_CASE("registered test functions materialize with their names") {
  const auto cfg = parse_config_text(kFullConfig, "test");
  const auto phis = cfg.test_functions();
  REQUIRE(phis.size() == 1);
  CHECK(phis[0].name == "probe");
  // monomial: 2 * (x - 0.5)^2 * bump at the center evaluates to 0.
  CHECK(phis[0].value(std::vector<double>{0.5}) == doctest::Approx(0.0));
}
