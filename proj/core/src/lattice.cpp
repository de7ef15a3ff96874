#include "fluctlab/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluctlab::sobolev {

FrequencyLattice make_midpoint_lattice(int d, double Xi, int M_f) {
  if (d != 1 && d != 2) throw std::invalid_argument("lattice: d must be 1 or 2");
  if (Xi <= 0) throw std::invalid_argument("lattice: cutoff must be positive");
  if (M_f < 2 || M_f % 2 != 0)
    throw std::invalid_argument("lattice: M_f must be even and >= 2");
  FrequencyLattice lat;
  lat.d = d;
  lat.dxi = 2.0 * Xi / M_f;
  lat.cutoff = Xi;
  lat.axis.resize(M_f);
  // Fill the positive half and mirror it so the lattice is exactly symmetric.
  const int half = M_f / 2;
  for (int j = 0; j < half; ++j) {
    const double v = (j + 0.5) * lat.dxi;
    lat.axis[half + j] = v;
    lat.axis[half - 1 - j] = -v;
  }
  return lat;
}

FrequencyLattice make_dual_lattice(int d, double L, int K) {
  if (d != 1 && d != 2) throw std::invalid_argument("lattice: d must be 1 or 2");
  if (L <= 0) throw std::invalid_argument("lattice: L must be positive");
  if (K < 1) throw std::invalid_argument("lattice: K must be >= 1");
  FrequencyLattice lat;
  lat.d = d;
  lat.dxi = std::numbers::pi / L;
  lat.cutoff = (K + 0.5) * lat.dxi;
  lat.axis.resize(2 * K + 1);
  for (int n = -K; n <= K; ++n) lat.axis[n + K] = n * lat.dxi;
  return lat;
}

bool same_lattice(const FrequencyLattice& a, const FrequencyLattice& b) {
  if (a.d != b.d || a.axis.size() != b.axis.size()) return false;
  for (std::size_t i = 0; i < a.axis.size(); ++i) {
    if (std::abs(a.axis[i] - b.axis[i]) > 1e-12) return false;
  }
  return true;
}

}  // namespace fluctlab::sobolev
