#include <doctest.h>

#include "fluctlab/test_functions.hpp"

#include <cmath>
#include <vector>

using namespace fluctlab::scenario;

TEST_CASE("bump test function: support, peak, and symmetry") {
  const auto phi = make_bump_phi(1, 2.0, {0.5}, 3.0, "b");
  CHECK(phi.value(std::vector<double>{0.5}) == doctest::Approx(3.0));
  CHECK(phi.value(std::vector<double>{2.5}) == 0.0);
  CHECK(phi.value(std::vector<double>{-1.5}) == 0.0);
  CHECK(phi.value(std::vector<double>{5.0}) == 0.0);
  CHECK(phi.value(std::vector<double>{1.0}) ==
        doctest::Approx(phi.value(std::vector<double>{0.0})));
  CHECK(phi.support_radius == doctest::Approx(2.0));
  // Gradient vanishes at the peak and outside the support.
  std::vector<double> g(1);
  phi.gradient(std::vector<double>{0.5}, g);
  CHECK(std::abs(g[0]) < 1e-14);
  phi.gradient(std::vector<double>{4.0}, g);
  CHECK(g[0] == 0.0);
}

TEST_CASE("bump gradient and hessian match finite differences") {
  for (int d : {1, 2}) {
    const auto phi =
        make_bump_phi(d, 1.5, std::vector<double>(d, 0.25), 2.0, "b");
    CHECK(max_gradient_fd_error(phi, 42) < 1e-5);
    CHECK(max_hessian_fd_error(phi, 43) < 1e-4);
  }
}

TEST_CASE("windowed monomial: value is the monomial times the window") {
  const auto phi = make_windowed_monomial(1, 0, 2, 2.0, {0.0}, 1.5, "m");
  const auto bump = make_bump_phi(1, 2.0, {0.0}, 1.0, "b");
  for (double x : {-1.9, -0.3, 0.0, 0.7, 1.2}) {
    const double expect =
        1.5 * x * x * bump.value(std::vector<double>{x});
    CHECK(phi.value(std::vector<double>{x}) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(phi.value(std::vector<double>{2.4}) == 0.0);
  CHECK(max_gradient_fd_error(phi, 44) < 1e-5);
  CHECK(max_hessian_fd_error(phi, 45) < 1e-4);
}

TEST_CASE("monomial in d=2 uses the requested axis") {
  const auto phi = make_windowed_monomial(2, 1, 1, 1.0, {0.0, 0.0}, 1.0, "m");
  const auto bump = make_bump_phi(2, 1.0, {0.0, 0.0}, 1.0, "b");
  const std::vector<double> x{0.2, -0.3};
  CHECK(phi.value(x) ==
        doctest::Approx(-0.3 * bump.value(x)).epsilon(1e-12));
}
