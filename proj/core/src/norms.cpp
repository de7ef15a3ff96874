#include "fluctlab/norms.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fluctlab::sobolev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double simpson(double (*f)(double, double), double p, double a, double b) {
  const double fa = f(a, p), fb = f(b, p), fm = f(0.5 * (a + b), p);
  struct Rec {
    static double go(double (*f)(double, double), double p, double a, double b,
                     double fa, double fm, double fb, double whole, double tol,
                     int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm, p), frm = f(rm, p);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return go(f, p, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             go(f, p, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return Rec::go(f, p, a, b, fa, fm, fb, whole, 1e-13 * std::max(1.0, std::abs(whole)),
                 48);
}

double bessel_weight(double xi, double alpha) {
  return std::pow(1.0 + xi * xi, -alpha);
}

/// int_X^inf (1+xi^2)^{-alpha} dxi for X >= 2 via the binomial series
/// (1+xi^2)^{-alpha} = sum_k binom(-alpha, k) xi^{-2 alpha - 2k}.
double upper_tail_series(double alpha, double X) {
  double coef = 1.0;  // binom(-alpha, k) * (-1)^k = binom(alpha + k - 1, k)
  double sum = 0.0;
  const double X2 = X * X;
  double xpow = std::pow(X, 1.0 - 2.0 * alpha);
  double sign = 1.0;
  for (int k = 0; k < 400; ++k) {
    const double term = sign * coef * xpow / (2.0 * alpha + 2.0 * k - 1.0);
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    coef *= (alpha + k) / (k + 1.0);
    xpow /= X2;
    sign = -sign;
  }
  return sum;
}

/// One-sided d=1 tail int_Xi^inf (1+xi^2)^{-alpha} dxi, alpha > 1/2.
double one_sided_tail_1d(double alpha, double Xi) {
  if (alpha == 1.0) return std::numbers::pi / 2.0 - std::atan(Xi);
  const double X0 = std::max(Xi, 2.0);
  double t = upper_tail_series(alpha, X0);
  if (Xi < X0) t += simpson(&bessel_weight, alpha, Xi, X0);
  return t;
}

}  // namespace

double bessel_tail_mass(int d, double alpha, double Xi) {
  if (Xi < 0) throw std::invalid_argument("bessel_tail_mass: Xi must be >= 0");
  if (alpha <= 0.5 * d) return kInf;
  if (d == 1) return 2.0 * one_sided_tail_1d(alpha, Xi);
  // d=2: integrate over |xi| > Xi (contains the square complement).
  return std::numbers::pi * std::pow(1.0 + Xi * Xi, 1.0 - alpha) / (alpha - 1.0);
}

double bessel_tail_second(int d, double alpha, double Xi) {
  if (Xi < 0) throw std::invalid_argument("bessel_tail_second: Xi must be >= 0");
  if (alpha <= 0.5 * d + 1.0) return kInf;
  if (d == 1) {
    // xi^2 (1+xi^2)^{-alpha} = (1+xi^2)^{1-alpha} - (1+xi^2)^{-alpha}
    return bessel_tail_mass(1, alpha - 1.0, Xi) - bessel_tail_mass(1, alpha, Xi);
  }
  const double S = 1.0 + Xi * Xi;
  return std::numbers::pi *
         (std::pow(S, 2.0 - alpha) / (alpha - 2.0) -
          std::pow(S, 1.0 - alpha) / (alpha - 1.0));
}

SobolevNormResult h_neg_alpha_norm(const EmpiricalSpectrum& spectrum,
                                   double alpha) {
  const FrequencyLattice& lat = spectrum.lattice;
  if (spectrum.tag != SourceTag::Field && alpha <= 0.5 * lat.d)
    throw std::invalid_argument(
        "h_neg_alpha_norm: alpha must exceed d/2 for point-mass sources");

  SobolevNormResult res;
  res.alpha = alpha;
  res.cutoff = lat.cutoff;

  const long n = lat.size();
  double acc = 0.0;
  double xi[2];
  for (long i = 0; i < n; ++i) {
    lat.node(i, xi);
    const double r2 = lat.d == 1 ? xi[0] * xi[0] : xi[0] * xi[0] + xi[1] * xi[1];
    acc += std::pow(1.0 + r2, -alpha) * std::norm(spectrum.F[i]);
  }
  res.value_sq = acc * lat.cell_volume();
  res.value = std::sqrt(res.value_sq);

  const double c0 = spectrum.bound_const;
  const double c1 = spectrum.bound_linear;
  if (c1 == 0.0) {
    res.residual = c0 * c0 * bessel_tail_mass(lat.d, alpha, lat.cutoff);
  } else if (c0 == 0.0) {
    res.residual = c1 * c1 * bessel_tail_second(lat.d, alpha, lat.cutoff);
  } else {
    res.residual = 2.0 * c0 * c0 * bessel_tail_mass(lat.d, alpha, lat.cutoff) +
                   2.0 * c1 * c1 * bessel_tail_second(lat.d, alpha, lat.cutoff);
  }
  return res;
}

}  // namespace fluctlab::sobolev
