#pragma once

#include <functional>
#include <span>
#include <string>

namespace fluctlab::scenario {

enum class KernelVariant { Zero, Gaussian, Bump };

/// Interaction kernel k: R^d -> R^d. The shipped catalogue applies one
/// bounded, square-integrable scalar profile to every component:
///   zero:             k = 0
///   gaussian(A, w):   profile(x) = A exp(-|x|^2 / (2 w^2))
///   bump(A, r):       profile(x) = A exp(1 - 1/(1 - |x|^2/r^2)) for |x| < r
/// Tests may install a custom closure (e.g. odd kernels); campaign code only
/// ever sees the catalogue variants, which have fast specialized pair loops.
struct KernelSpec {
  KernelVariant variant = KernelVariant::Zero;
  int d = 1;
  double amplitude = 0.0;
  double width = 1.0;   // gaussian
  double radius = 1.0;  // bump

  /// Optional override used by tests; takes dx (length d), writes k(dx).
  std::function<void(std::span<const double>, std::span<double>)> custom;

  bool is_zero() const { return !custom && variant == KernelVariant::Zero; }

  /// Scalar profile at squared distance r2 (catalogue variants only).
  double profile_r2(double r2) const;

  /// k(dx) -> out, both length d.
  void eval(std::span<const double> dx, std::span<double> out) const;

  /// Euclidean sup-norm bound sup_x |k(x)|_2 (catalogue variants).
  double sup_norm() const;

  std::string variant_name() const;
};

KernelSpec make_zero_kernel(int d);
KernelSpec make_gaussian_kernel(int d, double amplitude, double width);
KernelSpec make_bump_kernel(int d, double amplitude, double radius);

}  // namespace fluctlab::scenario
