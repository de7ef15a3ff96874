#include "fluctlab/coefficients.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fluctlab::scenario {

bool CoefficientSpec::is_zero() const {
  return std::all_of(base.begin(), base.end(), [](double v) { return v == 0.0; });
}

double CoefficientSpec::modulation(double t, std::span<const double> x) const {
  if (variant == CoeffVariant::Constant) return 1.0;
  assert(static_cast<int>(x.size()) == d);
  double phase = tau * t;
  for (int q = 0; q < d; ++q) phase += omega[q] * x[q];
  return 1.0 + eps * std::sin(phase);
}

void CoefficientSpec::eval(double t, std::span<const double> x,
                           std::span<double> out) const {
  assert(static_cast<int>(out.size()) == d * m);
  const double f = modulation(t, x);
  for (int i = 0; i < d * m; ++i) out[i] = f * base[i];
}

double CoefficientSpec::ellipticity_floor() const {
  // Gram matrix G = base * base^T, d x d with d <= 2.
  double lam_min = 0.0;
  if (d == 1) {
    double g = 0.0;
    for (int l = 0; l < m; ++l) g += base[l] * base[l];
    lam_min = g;
  } else if (d == 2) {
    double g00 = 0.0, g01 = 0.0, g11 = 0.0;
    for (int l = 0; l < m; ++l) {
      g00 += base[l] * base[l];
      g01 += base[l] * base[m + l];
      g11 += base[m + l] * base[m + l];
    }
    const double tr = g00 + g11;
    const double det = g00 * g11 - g01 * g01;
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    lam_min = tr / 2.0 - disc;
  } else {
    throw std::logic_error("ellipticity_floor: only d <= 2 supported");
  }
  if (variant == CoeffVariant::SmoothPerturbation) {
    const double s = 1.0 - std::abs(eps);
    lam_min *= s * s;
  }
  return lam_min;
}

double CoefficientSpec::max_abs_entry() const {
  double mx = 0.0;
  for (double v : base) mx = std::max(mx, std::abs(v));
  if (variant == CoeffVariant::SmoothPerturbation) mx *= 1.0 + std::abs(eps);
  return mx;
}

void CoefficientSpec::validate(bool require_elliptic) const {
  if (d < 1 || d > 2) throw std::invalid_argument("coefficient: d must be 1 or 2");
  if (m < 1) throw std::invalid_argument("coefficient: m must be >= 1");
  if (static_cast<int>(base.size()) != d * m)
    throw std::invalid_argument("coefficient: base must have d*m entries");
  if (variant == CoeffVariant::SmoothPerturbation) {
    if (std::abs(eps) >= 1.0)
      throw std::invalid_argument("coefficient: |eps| must be < 1");
    if (static_cast<int>(omega.size()) != d)
      throw std::invalid_argument("coefficient: omega must have d entries");
  }
  if (require_elliptic && ellipticity_floor() <= 0.0)
    throw std::invalid_argument("coefficient: c c^T must be uniformly positive");
}

std::string CoefficientSpec::variant_name() const {
  return variant == CoeffVariant::Constant ? "constant" : "smooth_perturbation";
}

CoefficientSpec make_constant_coeff(int d, int m, std::vector<double> entries) {
  CoefficientSpec c;
  c.variant = CoeffVariant::Constant;
  c.d = d;
  c.m = m;
  c.base = std::move(entries);
  return c;
}

CoefficientSpec make_scaled_identity_coeff(int d, double scale) {
  std::vector<double> e(static_cast<size_t>(d) * d, 0.0);
  for (int q = 0; q < d; ++q) e[static_cast<size_t>(q) * d + q] = scale;
  return make_constant_coeff(d, d, std::move(e));
}

CoefficientSpec make_perturbed_coeff(int d, int m, std::vector<double> base,
                                     double eps, std::vector<double> omega,
                                     double tau) {
  CoefficientSpec c;
  c.variant = CoeffVariant::SmoothPerturbation;
  c.d = d;
  c.m = m;
  c.base = std::move(base);
  c.eps = eps;
  c.omega = std::move(omega);
  c.tau = tau;
  return c;
}

}  // namespace fluctlab::scenario
