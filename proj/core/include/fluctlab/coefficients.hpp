#pragma once

#include <span>
#include <string>
#include <vector>

namespace fluctlab::scenario {

enum class CoeffVariant { Constant, SmoothPerturbation };

/// Diffusion-type coefficient c(t,x): R x R^d -> R^{d x m} (row-major).
///
/// Catalogue:
///   constant:             c(t,x) = base
///   smooth_perturbation:  c(t,x) = base * (1 + eps * sin(omega . x + tau * t))
/// The scalar modulation keeps every entry and all derivatives bounded and,
/// for |eps| < 1, preserves the ellipticity of base*base^T up to the factor
/// (1-|eps|)^2, so c*c^T stays uniformly positive whenever base*base^T is.
struct CoefficientSpec {
  CoeffVariant variant = CoeffVariant::Constant;
  int d = 1;  // rows (state dimension)
  int m = 1;  // columns (noise dimension)
  std::vector<double> base;  // d*m entries, row-major
  double eps = 0.0;          // modulation amplitude, |eps| < 1
  std::vector<double> omega;  // spatial wavevector, length d
  double tau = 0.0;           // temporal frequency

  bool is_constant() const { return variant == CoeffVariant::Constant; }
  bool is_zero() const;

  /// Scalar factor multiplying `base` at (t, x); 1 for the constant variant.
  double modulation(double t, std::span<const double> x) const;

  /// c(t,x) -> out (d*m, row-major).
  void eval(double t, std::span<const double> x, std::span<double> out) const;

  /// Smallest eigenvalue of base*base^T (d <= 2), scaled by (1-|eps|)^2 for
  /// the perturbed variant: a uniform lower bound for eigenvalues of c c^T.
  double ellipticity_floor() const;

  /// sup over (t,x) of max_|entry|; modulation contributes (1+|eps|).
  double max_abs_entry() const;

  void validate(bool require_elliptic) const;

  std::string variant_name() const;
};

CoefficientSpec make_constant_coeff(int d, int m, std::vector<double> entries);
/// c * identity (m = d).
CoefficientSpec make_scaled_identity_coeff(int d, double c);
CoefficientSpec make_perturbed_coeff(int d, int m, std::vector<double> base,
                                     double eps, std::vector<double> omega,
                                     double tau = 0.0);

}  // namespace fluctlab::scenario
