#pragma once

#include "fluctlab/spectrum.hpp"

namespace fluctlab::sobolev {

struct SobolevNormResult {
  double alpha = 0.0;
  double cutoff = 0.0;
  double value = 0.0;     // ||.||_{H^{-alpha}}
  double value_sq = 0.0;  // lattice quadrature of the squared norm
  double residual = 0.0;  // analytic bound on the neglected |xi| > cutoff tail
};

/// Lattice quadrature of ||f||^2_{H^{-alpha}} = int (1+|xi|^2)^{-alpha} |F|^2,
/// with the tail bounded through the spectrum's |F| <= c0 + c1 |xi| envelope.
/// Point-mass sources (tags particles/difference) require alpha > d/2.
SobolevNormResult h_neg_alpha_norm(const EmpiricalSpectrum& spectrum,
                                   double alpha);

/// int_{|xi| > Xi} (1 + |xi|^2)^{-alpha} dxi over R^d (d=2 uses the covering
/// ball complement, an upper bound for the square complement). Infinite when
/// alpha <= d/2.
double bessel_tail_mass(int d, double alpha, double Xi);

/// Same with an extra |xi|^2 factor; infinite when alpha <= d/2 + 1.
double bessel_tail_second(int d, double alpha, double Xi);

}  // namespace fluctlab::sobolev
