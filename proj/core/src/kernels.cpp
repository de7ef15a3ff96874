#include "fluctlab/kernels.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fluctlab::scenario {

double KernelSpec::profile_r2(double r2) const {
  switch (variant) {
    case KernelVariant::Zero:
      return 0.0;
    case KernelVariant::Gaussian:
      return amplitude * std::exp(-r2 / (2.0 * width * width));
    case KernelVariant::Bump: {
      const double u = r2 / (radius * radius);
      if (u >= 1.0) return 0.0;
      return amplitude * std::exp(1.0 - 1.0 / (1.0 - u));
    }
  }
  return 0.0;
}

void KernelSpec::eval(std::span<const double> dx, std::span<double> out) const {
  assert(static_cast<int>(dx.size()) == d && static_cast<int>(out.size()) == d);
  if (custom) {
    custom(dx, out);
    return;
  }
  double r2 = 0.0;
  for (int q = 0; q < d; ++q) r2 += dx[q] * dx[q];
  const double p = profile_r2(r2);
  for (int q = 0; q < d; ++q) out[q] = p;
}

double KernelSpec::sup_norm() const {
  if (custom)
    throw std::logic_error("sup_norm unavailable for custom kernels");
  // Profile maximizes at r=0 for both catalogue shapes; each of the d
  // components then equals the profile value.
  const double peak = std::abs(amplitude) * (variant == KernelVariant::Zero ? 0.0 : 1.0);
  return peak * std::sqrt(static_cast<double>(d));
}

std::string KernelSpec::variant_name() const {
  if (custom) return "custom";
  switch (variant) {
    case KernelVariant::Zero: return "zero";
    case KernelVariant::Gaussian: return "gaussian";
    case KernelVariant::Bump: return "bump";
  }
  return "?";
}

KernelSpec make_zero_kernel(int d) {
  KernelSpec k;
  k.variant = KernelVariant::Zero;
  k.d = d;
  return k;
}

KernelSpec make_gaussian_kernel(int d, double amplitude, double width) {
  if (width <= 0.0) throw std::invalid_argument("gaussian kernel width must be > 0");
  KernelSpec k;
  k.variant = KernelVariant::Gaussian;
  k.d = d;
  k.amplitude = amplitude;
  k.width = width;
  return k;
}

KernelSpec make_bump_kernel(int d, double amplitude, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("bump kernel radius must be > 0");
  KernelSpec k;
  k.variant = KernelVariant::Bump;
  k.d = d;
  k.amplitude = amplitude;
  k.radius = radius;
  return k;
}

}  // namespace fluctlab::scenario
