#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluctlab::meanfield {

/// Map x into the periodic box [-L, L).
inline double wrap(double x, double L) {
  const double P = 2.0 * L;
  double y = std::fmod(x + L, P);
  if (y < 0) y += P;
  return y - L;
}

/// Minimal-image displacement: the representative of dx in [-L, L).
inline double min_image(double dx, double L) { return wrap(dx, L); }

/// Uniform periodic grid on [-L, L)^d with M nodes per axis (power of two).
/// Dual frequencies are xi_k = (pi/L) k for centered k in [-M/2, M/2).
struct Grid {
  int d = 1;
  int M = 0;
  double L = 0.0;

  Grid() = default;
  Grid(int dim, int nodes, double half_width) : d(dim), M(nodes), L(half_width) {
    if (d != 1 && d != 2) throw std::invalid_argument("grid: d must be 1 or 2");
    if (M < 2 || (M & (M - 1)) != 0)
      throw std::invalid_argument("grid: M must be a power of two >= 2");
    if (L <= 0) throw std::invalid_argument("grid: L must be positive");
  }

  double h() const { return 2.0 * L / M; }
  double cell_volume() const { return d == 1 ? h() : h() * h(); }
  long size() const { return d == 1 ? M : static_cast<long>(M) * M; }

  double node(int j) const { return -L + j * h(); }

  /// Centered frequency index from FFT-layout index.
  int centered(int k) const { return k < M / 2 ? k : k - M; }
  /// Dual frequency of FFT-layout index k.
  double freq(int k) const { return std::numbers::pi / L * centered(k); }

  /// Fundamental dual spacing pi/L.
  double dual_spacing() const { return std::numbers::pi / L; }

  long index(int j0, int j1 = 0) const {
    return d == 1 ? j0 : static_cast<long>(j0) * M + j1;
  }
};

}  // namespace fluctlab::meanfield
