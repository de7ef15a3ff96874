#include "fluctlab/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluctlab::meanfield {

std::vector<cplx> make_twiddles(int n) {
  std::vector<cplx> tw;
  tw.reserve(n > 0 ? n - 1 : 0);
  for (int len = 2; len <= n; len <<= 1) {
    const double step = -2.0 * std::numbers::pi / len;
    for (int j = 0; j < len / 2; ++j)
      tw.push_back(std::polar(1.0, step * j));
  }
  return tw;
}

void fft_inplace(cplx* a, int n, bool inverse, const cplx* twiddles) {
  if (n <= 1) return;
  // Bit-reversal permutation.
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const cplx* stage = twiddles;
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len / 2;
    for (int i = 0; i < n; i += len) {
      for (int j = 0; j < half; ++j) {
        const cplx w = inverse ? std::conj(stage[j]) : stage[j];
        const cplx u = a[i + j];
        const cplx v = a[i + j + half] * w;
        a[i + j] = u + v;
        a[i + j + half] = u - v;
      }
    }
    stage += half;
  }
  if (inverse) {
    const double s = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= s;
  }
}

SpectralTransform::SpectralTransform(const Grid& g)
    : g_(g), twiddles_(make_twiddles(g.M)) {}

void SpectralTransform::fft_all_axes(cplx* data, bool inverse) const {
  const int M = g_.M;
  if (g_.d == 1) {
    fft_inplace(data, M, inverse, twiddles_.data());
    return;
  }
  // Rows (contiguous), then columns via a strided gather.
  for (int r = 0; r < M; ++r)
    fft_inplace(data + static_cast<long>(r) * M, M, inverse, twiddles_.data());
  std::vector<cplx> col(M);
  for (int c = 0; c < M; ++c) {
    for (int r = 0; r < M; ++r) col[r] = data[static_cast<long>(r) * M + c];
    fft_inplace(col.data(), M, inverse, twiddles_.data());
    for (int r = 0; r < M; ++r) data[static_cast<long>(r) * M + c] = col[r];
  }
}

namespace {
// exp(-i xi_k x_j) = (-1)^{k} exp(-2 pi i jk / M) on the [-L, L) grid, so the
// integral-convention transform is a plain DFT times h^d and a parity flip.
inline double parity(int k) { return (k & 1) ? -1.0 : 1.0; }
}  // namespace

void SpectralTransform::forward(std::span<const double> values,
                                std::span<cplx> coeff) const {
  const long n = g_.size();
  if (static_cast<long>(values.size()) != n || static_cast<long>(coeff.size()) != n)
    throw std::invalid_argument("spectral forward: size mismatch");
  for (long i = 0; i < n; ++i) coeff[i] = values[i];
  fft_all_axes(coeff.data(), false);
  const double scale = g_.cell_volume();
  const int M = g_.M;
  if (g_.d == 1) {
    for (int k = 0; k < M; ++k) coeff[k] *= scale * parity(k);
  } else {
    for (int k0 = 0; k0 < M; ++k0)
      for (int k1 = 0; k1 < M; ++k1)
        coeff[g_.index(k0, k1)] *= scale * parity(k0 + k1);
  }
}

void SpectralTransform::inverse(std::span<const cplx> coeff,
                                std::span<double> values, double* max_imag) const {
  const long n = g_.size();
  if (static_cast<long>(values.size()) != n || static_cast<long>(coeff.size()) != n)
    throw std::invalid_argument("spectral inverse: size mismatch");
  std::vector<cplx> work(coeff.begin(), coeff.end());
  const int M = g_.M;
  if (g_.d == 1) {
    for (int k = 0; k < M; ++k) work[k] *= parity(k);
  } else {
    for (int k0 = 0; k0 < M; ++k0)
      for (int k1 = 0; k1 < M; ++k1)
        work[g_.index(k0, k1)] *= parity(k0 + k1);
  }
  fft_all_axes(work.data(), true);
  const double scale = 1.0 / g_.cell_volume();
  double max_abs = 0.0, max_im = 0.0;
  for (long i = 0; i < n; ++i) {
    const cplx z = work[i] * scale;
    values[i] = z.real();
    max_abs = std::max(max_abs, std::abs(z.real()));
    max_im = std::max(max_im, std::abs(z.imag()));
  }
  if (max_imag) *max_imag = max_abs > 0 ? max_im / max_abs : max_im;
}

}  // namespace fluctlab::meanfield
