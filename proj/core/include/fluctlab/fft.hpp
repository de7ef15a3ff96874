#pragma once

#include <complex>
#include <span>
#include <vector>

#include "fluctlab/grid.hpp"

namespace fluctlab::meanfield {

using cplx = std::complex<double>;

/// In-place iterative radix-2 FFT. n must be a power of two. The inverse
/// applies the 1/n factor. Twiddles are taken from a caller-supplied table
/// (see make_twiddles) so repeated transforms share one set of constants.
void fft_inplace(cplx* a, int n, bool inverse, const cplx* twiddles);

/// Twiddle table for fft_inplace: e^{-2*pi*i*j/len} packed stage by stage
/// (len = 2, 4, ..., n; j < len/2), n-1 entries total.
std::vector<cplx> make_twiddles(int n);

/// Grid transforms in the integral convention
///   c_k = h^d * sum_j f_j exp(-i xi_k . x_j)  ~=  \int f(x) exp(-i xi_k . x) dx
/// with xi_k the grid's dual frequencies in FFT layout. The paper-normalized
/// transform is (2*pi)^{-d/2} c_k. Instances are immutable after
/// construction and safe to share across threads; per-call scratch is local.
class SpectralTransform {
 public:
  explicit SpectralTransform(const Grid& g);

  const Grid& grid() const { return g_; }

  void forward(std::span<const double> values, std::span<cplx> coeff) const;

  /// Inverse of forward. If max_imag is given it receives the largest
  /// |imaginary residue| relative to the largest |value| (should be ~1e-14
  /// for coefficients of a real field).
  void inverse(std::span<const cplx> coeff, std::span<double> values,
               double* max_imag = nullptr) const;

 private:
  void fft_all_axes(cplx* data, bool inverse) const;

  Grid g_;
  std::vector<cplx> twiddles_;
};

}  // namespace fluctlab::meanfield
