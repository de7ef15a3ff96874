#pragma once

#include <vector>

namespace fluctlab::sobolev {

/// Uniform symmetric frequency lattice: the tensor product of one axis of
/// evenly spaced nodes, used as a midpoint quadrature rule for integrals over
/// [-cutoff, cutoff]^d. Each node owns a cell of volume dxi^d.
struct FrequencyLattice {
  int d = 1;
  double dxi = 0.0;     // node spacing per axis
  double cutoff = 0.0;  // half-width of the covered frequency box
  std::vector<double> axis;  // ascending node coordinates, mirror-symmetric

  int per_axis() const { return static_cast<int>(axis.size()); }
  long size() const {
    return d == 1 ? per_axis() : static_cast<long>(per_axis()) * per_axis();
  }
  double cell_volume() const { return d == 1 ? dxi : dxi * dxi; }

  /// Node coordinates of flat index i (row-major over axes).
  void node(long i, double* xi) const {
    if (d == 1) {
      xi[0] = axis[i];
    } else {
      xi[0] = axis[i / per_axis()];
      xi[1] = axis[i % per_axis()];
    }
  }
};

/// Nodes at the midpoints of M_f cells tiling [-Xi, Xi]: xi_j = -Xi + (j+1/2) dxi
/// with dxi = 2 Xi / M_f. No zero node; suits point-mass spectra at any cutoff.
FrequencyLattice make_midpoint_lattice(int d, double Xi, int M_f);

/// Nodes at integer multiples of the box dual spacing pi/L: n = -K..K. This is
/// the lattice on which grid-field spectra are exact; cutoff is (K+1/2) pi/L.
FrequencyLattice make_dual_lattice(int d, double L, int K);

/// True if both lattices have the same node set (within 1e-12 absolute).
bool same_lattice(const FrequencyLattice& a, const FrequencyLattice& b);

}  // namespace fluctlab::sobolev
