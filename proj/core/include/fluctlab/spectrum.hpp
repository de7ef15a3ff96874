#pragma once

#include "fluctlab/density_field.hpp"
#include "fluctlab/kernels.hpp"
#include "fluctlab/lattice.hpp"
#include "fluctlab/test_functions.hpp"

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace fluctlab::sobolev {

enum class SourceTag { Particles, Field, Difference };

std::string to_string(SourceTag tag);

/// Fourier transform of a signed measure evaluated on a frequency lattice,
/// paper convention F[mu](xi) = (2 pi)^{-d/2} integral exp(-i xi.x) dmu(x).
/// bound_const/bound_linear give the analytic envelope
/// |F(xi)| <= bound_const + bound_linear * |xi| used for tail residuals.
struct EmpiricalSpectrum {
  FrequencyLattice lattice;
  SourceTag tag = SourceTag::Particles;
  std::vector<std::complex<double>> F;  // lattice.size(), row-major over axes
  double bound_const = 0.0;
  double bound_linear = 0.0;
};

/// F(xi) = (2 pi)^{-d/2} (1/N) sum_j exp(-i xi . X_j) at every lattice node.
EmpiricalSpectrum empirical_fourier(std::span<const double> positions, int N,
                                    int d, const FrequencyLattice& lattice);

/// Quadrature transform of a grid field. The lattice must be a subset of the
/// box's dual lattice (node = n * pi/L, |n| <= M/2 - 1); then the values are
/// the field's spectral coefficients times (2 pi)^{-d/2}.
EmpiricalSpectrum field_fourier(const meanfield::DensityField& field,
                                const FrequencyLattice& lattice);

/// wa * a + wb * b on a shared lattice; tag becomes Difference and the
/// envelope bounds add with |wa|, |wb| weights.
EmpiricalSpectrum combine_spectra(const EmpiricalSpectrum& a, double wa,
                                  const EmpiricalSpectrum& b, double wb);

/// Transform of the empirical interaction term div((k*mu) mu):
///   F(xi) = (2 pi)^{-d/2} (i/N) sum_j exp(-i xi . X_j) xi . (k*mu)(X_j)
/// with (k*mu)(X_j) = (1/N) sum_l k(X_j - X_l) by direct summation.
EmpiricalSpectrum interaction_spectrum(std::span<const double> positions, int N,
                                       int d, double L,
                                       const scenario::KernelSpec& kernel,
                                       const FrequencyLattice& lattice);

/// Field version of the interaction transform: F(xi) = i xi . (2 pi)^{-d/2}
/// c[(k*rho) rho](xi) with k*rho the periodic grid convolution.
EmpiricalSpectrum interaction_spectrum_field(const meanfield::DensityField& rho,
                                             const scenario::KernelSpec& kernel,
                                             const meanfield::SpectralTransform& tr,
                                             const FrequencyLattice& lattice);

/// Periodic grid convolution k*rho via the spectral product (no filtering):
/// out is d components of grid.size() values; exact circular convolution of
/// the grid samples.
std::vector<std::vector<double>> grid_kernel_convolution(
    const meanfield::DensityField& rho, const scenario::KernelSpec& kernel,
    const meanfield::SpectralTransform& tr);

/// Bilinear pairing <phi . k*(mu - rho), mu - rho> expanded into four terms:
/// particle-particle double sum, the two cross terms (empirical convolution
/// at grid nodes / grid convolution interpolated at particles), and the
/// field-field grid quadrature. phi supplies one scalar test function per
/// component (d entries; d=1 passes the function itself).
double pair_test_bilinear(std::span<const double> positions, int N,
                          const meanfield::DensityField& rho,
                          std::span<const scenario::TestFunction> phi,
                          const scenario::KernelSpec& kernel,
                          const meanfield::SpectralTransform& tr);

}  // namespace fluctlab::sobolev
