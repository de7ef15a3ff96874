#pragma once

#include "fluctlab/kernels.hpp"

#include <complex>
#include <span>

namespace fluctlab::particles {

/// k*mu at every particle: out_i = (1/N) sum_j k(X_i - X_j), including j = i,
/// with min-image displacements in [-L, L)^d. positions and out are N x d
/// row-major. Catalogue kernels run specialized vectorized loops.
void empirical_convolution(std::span<const double> positions, int N, int d,
                           double L, const scenario::KernelSpec& kernel,
                           std::span<double> out);

/// k*mu at arbitrary targets: out_s = (1/N) sum_j k(T_s - X_j). targets is
/// S x d, sources N x d, out S x d.
void convolution_at(std::span<const double> targets, int S,
                    std::span<const double> sources, int N, int d, double L,
                    const scenario::KernelSpec& kernel, std::span<double> out);

/// Interaction drift: drift_i = -(1/N) sum_j k(X_i - X_j) = -(k*mu)(X_i).
void pairwise_drift(std::span<const double> positions, int N, int d, double L,
                    const scenario::KernelSpec& kernel, std::span<double> drift);

/// Accumulates weighted phase sums over a uniform frequency ladder:
///   out[f] += sum_j w[j] * exp(-i (xi0 + f*dxi) * x[j]),  f = 0..out.size()-1.
/// Uses a periodically re-anchored rotation recurrence (error ~ 1e-14).
void nudft_1d(std::span<const double> x, std::span<const double> w, double xi0,
              double dxi, std::span<std::complex<double>> out);

/// d=2 tensor ladder: out[f0*F1 + f1] += sum_j w[j] *
///   exp(-i ((xi0 + f0*dxi) * x_{j,0} + (eta0 + f1*deta) * x_{j,1})).
/// xy is N x 2 row-major.
void nudft_2d(std::span<const double> xy, int N, std::span<const double> w,
              double xi0, double dxi, int F0, double eta0, double deta, int F1,
              std::span<std::complex<double>> out);

/// Batch bump evaluation: out[s] = A * exp(1 - 1/(1 - |x_s - c|^2/r^2)) for
/// points inside the support ball, 0 outside. xs is S x d row-major.
void bump_batch(std::span<const double> xs, int S, int d,
                std::span<const double> center, double radius, double amplitude,
                std::span<double> out);

}  // namespace fluctlab::particles
