// Hot numeric loops, isolated so the build can hand just this translation
// unit the vector-math flags (the surrounding modules keep strict FP).
// Everything here is straight-line arithmetic over caller-validated buffers:
// no error handling, no I/O, no RNG.

#include "fluctlab/drift_kernels.hpp"

#include <cassert>
#include <cmath>
#include <vector>

namespace fluctlab::particles {
namespace {

// Min-image displacement for positions already wrapped into [-L, L):
// dx lies in (-2L, 2L), one rounding brings it to [-L, L).
inline double min_image_fast(double dx, double P, double invP) {
  return dx - P * std::nearbyint(dx * invP);
}

void gaussian_conv_1d(std::span<const double> T, int S, std::span<const double> X,
                      int N, double L, double A, double w, std::span<double> out) {
  const double P = 2.0 * L, invP = 1.0 / P;
  const double c = -1.0 / (2.0 * w * w);
  const double scale = A / N;
  for (int i = 0; i < S; ++i) {
    const double xi = T[i];
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
      const double dx = min_image_fast(xi - X[j], P, invP);
      acc += std::exp(c * dx * dx);
    }
    out[i] = scale * acc;
  }
}

void gaussian_conv_2d(std::span<const double> T, int S, std::span<const double> X,
                      int N, double L, double A, double w, std::span<double> out) {
  const double P = 2.0 * L, invP = 1.0 / P;
  const double c = -1.0 / (2.0 * w * w);
  const double scale = A / N;
  for (int i = 0; i < S; ++i) {
    const double xi0 = T[2 * i], xi1 = T[2 * i + 1];
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
      const double d0 = min_image_fast(xi0 - X[2 * j], P, invP);
      const double d1 = min_image_fast(xi1 - X[2 * j + 1], P, invP);
      acc += std::exp(c * (d0 * d0 + d1 * d1));
    }
    out[2 * i] = scale * acc;
    out[2 * i + 1] = scale * acc;
  }
}

void bump_conv_1d(std::span<const double> T, int S, std::span<const double> X,
                  int N, double L, double A, double r, std::span<double> out) {
  const double P = 2.0 * L, invP = 1.0 / P;
  const double inv_r2 = 1.0 / (r * r);
  const double scale = A / N;
  for (int i = 0; i < S; ++i) {
    const double xi = T[i];
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
      const double dx = min_image_fast(xi - X[j], P, invP);
      const double t = 1.0 - dx * dx * inv_r2;
      const double tc = t > 0.0 ? t : 1.0;
      const double v = std::exp(1.0 - 1.0 / tc);
      acc += t > 0.0 ? v : 0.0;
    }
    out[i] = scale * acc;
  }
}

void bump_conv_2d(std::span<const double> T, int S, std::span<const double> X,
                  int N, double L, double A, double r, std::span<double> out) {
  const double P = 2.0 * L, invP = 1.0 / P;
  const double inv_r2 = 1.0 / (r * r);
  const double scale = A / N;
  for (int i = 0; i < S; ++i) {
    const double xi0 = T[2 * i], xi1 = T[2 * i + 1];
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
      const double d0 = min_image_fast(xi0 - X[2 * j], P, invP);
      const double d1 = min_image_fast(xi1 - X[2 * j + 1], P, invP);
      const double t = 1.0 - (d0 * d0 + d1 * d1) * inv_r2;
      const double tc = t > 0.0 ? t : 1.0;
      const double v = std::exp(1.0 - 1.0 / tc);
      acc += t > 0.0 ? v : 0.0;
    }
    out[2 * i] = scale * acc;
    out[2 * i + 1] = scale * acc;
  }
}

void custom_conv(std::span<const double> T, int S, std::span<const double> X,
                 int N, int d, double L, const scenario::KernelSpec& kernel,
                 std::span<double> out) {
  const double P = 2.0 * L, invP = 1.0 / P;
  double dx[2], kv[2];
  for (int i = 0; i < S; ++i) {
    double acc[2] = {0.0, 0.0};
    for (int j = 0; j < N; ++j) {
      for (int q = 0; q < d; ++q)
        dx[q] = min_image_fast(T[i * d + q] - X[j * d + q], P, invP);
      kernel.eval(std::span<const double>(dx, d), std::span<double>(kv, d));
      for (int q = 0; q < d; ++q) acc[q] += kv[q];
    }
    for (int q = 0; q < d; ++q) out[i * d + q] = acc[q] / N;
  }
}

constexpr int kAnchorEvery = 128;  // bounds recurrence rounding to ~1e-14

}  // namespace

void convolution_at(std::span<const double> targets, int S,
                    std::span<const double> sources, int N, int d, double L,
                    const scenario::KernelSpec& kernel, std::span<double> out) {
  assert(static_cast<int>(targets.size()) == S * d &&
         static_cast<int>(sources.size()) == N * d &&
         static_cast<int>(out.size()) == S * d);
  if (kernel.is_zero()) {
    for (int i = 0; i < S * d; ++i) out[i] = 0.0;
    return;
  }
  if (kernel.custom) {
    custom_conv(targets, S, sources, N, d, L, kernel, out);
    return;
  }
  using scenario::KernelVariant;
  if (kernel.variant == KernelVariant::Gaussian) {
    if (d == 1)
      gaussian_conv_1d(targets, S, sources, N, L, kernel.amplitude, kernel.width, out);
    else
      gaussian_conv_2d(targets, S, sources, N, L, kernel.amplitude, kernel.width, out);
  } else {
    if (d == 1)
      bump_conv_1d(targets, S, sources, N, L, kernel.amplitude, kernel.radius, out);
    else
      bump_conv_2d(targets, S, sources, N, L, kernel.amplitude, kernel.radius, out);
  }
}

void empirical_convolution(std::span<const double> positions, int N, int d,
                           double L, const scenario::KernelSpec& kernel,
                           std::span<double> out) {
  convolution_at(positions, N, positions, N, d, L, kernel, out);
}

void pairwise_drift(std::span<const double> positions, int N, int d, double L,
                    const scenario::KernelSpec& kernel, std::span<double> drift) {
  empirical_convolution(positions, N, d, L, kernel, drift);
  for (int i = 0; i < N * d; ++i) drift[i] = -drift[i];
}

void nudft_1d(std::span<const double> x, std::span<const double> w, double xi0,
              double dxi, std::span<std::complex<double>> out) {
  assert(x.size() == w.size());
  const int F = static_cast<int>(out.size());
  const size_t N = x.size();
  for (size_t j = 0; j < N; ++j) {
    const double xj = x[j];
    const double wj = w[j];
    const double rot_re = std::cos(dxi * xj);
    const double rot_im = -std::sin(dxi * xj);
    double cur_re = 0.0, cur_im = 0.0;
    for (int f = 0; f < F; ++f) {
      if (f % kAnchorEvery == 0) {
        const double th = (xi0 + f * dxi) * xj;
        cur_re = std::cos(th);
        cur_im = -std::sin(th);
      }
      out[f] += std::complex<double>(wj * cur_re, wj * cur_im);
      const double nr = cur_re * rot_re - cur_im * rot_im;
      cur_im = cur_re * rot_im + cur_im * rot_re;
      cur_re = nr;
    }
  }
}

void nudft_2d(std::span<const double> xy, int N, std::span<const double> w,
              double xi0, double dxi, int F0, double eta0, double deta, int F1,
              std::span<std::complex<double>> out) {
  assert(static_cast<int>(out.size()) == F0 * F1);
  std::vector<std::complex<double>> ph0(F0), ph1(F1);
  for (int j = 0; j < N; ++j) {
    const double x0 = xy[2 * j], x1 = xy[2 * j + 1];
    auto fill = [](std::vector<std::complex<double>>& ph, double start,
                   double step, double x) {
      const double rot_re = std::cos(step * x);
      const double rot_im = -std::sin(step * x);
      double cr = 0.0, ci = 0.0;
      const int F = static_cast<int>(ph.size());
      for (int f = 0; f < F; ++f) {
        if (f % kAnchorEvery == 0) {
          const double th = (start + f * step) * x;
          cr = std::cos(th);
          ci = -std::sin(th);
        }
        ph[f] = {cr, ci};
        const double nr = cr * rot_re - ci * rot_im;
        ci = cr * rot_im + ci * rot_re;
        cr = nr;
      }
    };
    fill(ph0, xi0, dxi, x0);
    fill(ph1, eta0, deta, x1);
    const double wj = w[j];
    for (int f0 = 0; f0 < F0; ++f0) {
      const std::complex<double> a = wj * ph0[f0];
      std::complex<double>* row = out.data() + static_cast<size_t>(f0) * F1;
      for (int f1 = 0; f1 < F1; ++f1) row[f1] += a * ph1[f1];
    }
  }
}

void bump_batch(std::span<const double> xs, int S, int d,
                std::span<const double> center, double radius, double amplitude,
                std::span<double> out) {
  assert(static_cast<int>(out.size()) == S);
  const double inv_r2 = 1.0 / (radius * radius);
  if (d == 1) {
    const double c0 = center[0];
    for (int s = 0; s < S; ++s) {
      const double y = xs[s] - c0;
      const double t = 1.0 - y * y * inv_r2;
      const double tc = t > 0.0 ? t : 1.0;
      const double v = amplitude * std::exp(1.0 - 1.0 / tc);
      out[s] = t > 0.0 ? v : 0.0;
    }
  } else {
    const double c0 = center[0], c1 = center[1];
    for (int s = 0; s < S; ++s) {
      const double y0 = xs[2 * s] - c0, y1 = xs[2 * s + 1] - c1;
      const double t = 1.0 - (y0 * y0 + y1 * y1) * inv_r2;
      const double tc = t > 0.0 ? t : 1.0;
      const double v = amplitude * std::exp(1.0 - 1.0 / tc);
      out[s] = t > 0.0 ? v : 0.0;
    }
  }
}

}  // namespace fluctlab::particles
