#include "fluctlab/spectrum.hpp"

#include "fluctlab/drift_kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluctlab::sobolev {

namespace {

double fourier_const(int d) {
  return std::pow(2.0 * std::numbers::pi, -0.5 * d);
}

/// Map a lattice axis node to the FFT-layout index of the grid's dual mode;
/// throws if the node is not a dual mode within the resolved band.
int dual_index(double node, const meanfield::Grid& g) {
  const double r = node / g.dual_spacing();
  const double nd = std::round(r);
  if (std::abs(r - nd) > 1e-9)
    throw std::invalid_argument("spectrum: lattice incommensurate with the grid dual lattice");
  const int n = static_cast<int>(nd);
  if (std::abs(n) > g.M / 2 - 1)
    throw std::invalid_argument("spectrum: lattice node outside the grid's resolved band");
  return n >= 0 ? n : n + g.M;
}

std::vector<double> grid_nodes(const meanfield::Grid& g) {
  const long n = g.size();
  std::vector<double> nodes(static_cast<std::size_t>(n) * g.d);
  for (long c = 0; c < n; ++c) {
    if (g.d == 1) {
      nodes[c] = g.node(static_cast<int>(c));
    } else {
      nodes[2 * c] = g.node(static_cast<int>(c / g.M));
      nodes[2 * c + 1] = g.node(static_cast<int>(c % g.M));
    }
  }
  return nodes;
}

/// Accumulates sum_j w_j exp(-i xi . X_j) over all lattice nodes.
void lattice_nudft(std::span<const double> positions, int N, int d,
                   const FrequencyLattice& lat, std::span<const double> w,
                   std::span<std::complex<double>> out) {
  const double xi0 = lat.axis.front();
  if (d == 1) {
    particles::nudft_1d(positions, w, xi0, lat.dxi, out);
  } else {
    particles::nudft_2d(positions, N, w, xi0, lat.dxi, lat.per_axis(), xi0,
                        lat.dxi, lat.per_axis(), out);
  }
}

}  // namespace

std::string to_string(SourceTag tag) {
  switch (tag) {
    case SourceTag::Particles: return "particles";
    case SourceTag::Field: return "field";
    case SourceTag::Difference: return "difference";
  }
  return "?";
}

EmpiricalSpectrum empirical_fourier(std::span<const double> positions, int N,
                                    int d, const FrequencyLattice& lattice) {
  if (N < 1) throw std::invalid_argument("empirical_fourier: N must be >= 1");
  if (d != lattice.d) throw std::invalid_argument("empirical_fourier: dimension mismatch");
  EmpiricalSpectrum sp;
  sp.lattice = lattice;
  sp.tag = SourceTag::Particles;
  sp.F.assign(lattice.size(), {0.0, 0.0});
  const double s = fourier_const(d);
  std::vector<double> w(N, s / N);
  lattice_nudft(positions, N, d, lattice, w, sp.F);
  sp.bound_const = s;
  sp.bound_linear = 0.0;
  return sp;
}

EmpiricalSpectrum field_fourier(const meanfield::DensityField& field,
                                const FrequencyLattice& lattice) {
  const meanfield::Grid& g = field.grid;
  if (g.d != lattice.d) throw std::invalid_argument("field_fourier: dimension mismatch");
  EmpiricalSpectrum sp;
  sp.lattice = lattice;
  sp.tag = SourceTag::Field;
  sp.F.resize(lattice.size());
  const int n_axis = lattice.per_axis();
  std::vector<int> idx(n_axis);
  for (int i = 0; i < n_axis; ++i) idx[i] = dual_index(lattice.axis[i], g);
  const double s = fourier_const(g.d);
  if (g.d == 1) {
    for (int i = 0; i < n_axis; ++i) sp.F[i] = s * field.spectrum[idx[i]];
  } else {
    for (int i0 = 0; i0 < n_axis; ++i0) {
      for (int i1 = 0; i1 < n_axis; ++i1) {
        sp.F[static_cast<long>(i0) * n_axis + i1] =
            s * field.spectrum[static_cast<long>(idx[i0]) * g.M + idx[i1]];
      }
    }
  }
  double abs_mass = 0.0;
  for (double v : field.values) abs_mass += std::abs(v);
  sp.bound_const = s * abs_mass * g.cell_volume();
  sp.bound_linear = 0.0;
  return sp;
}

EmpiricalSpectrum combine_spectra(const EmpiricalSpectrum& a, double wa,
                                  const EmpiricalSpectrum& b, double wb) {
  if (!same_lattice(a.lattice, b.lattice))
    throw std::invalid_argument("combine_spectra: lattices differ");
  EmpiricalSpectrum sp;
  sp.lattice = a.lattice;
  sp.tag = SourceTag::Difference;
  sp.F.resize(a.F.size());
  for (std::size_t i = 0; i < a.F.size(); ++i) sp.F[i] = wa * a.F[i] + wb * b.F[i];
  sp.bound_const = std::abs(wa) * a.bound_const + std::abs(wb) * b.bound_const;
  sp.bound_linear = std::abs(wa) * a.bound_linear + std::abs(wb) * b.bound_linear;
  return sp;
}

EmpiricalSpectrum interaction_spectrum(std::span<const double> positions, int N,
                                       int d, double L,
                                       const scenario::KernelSpec& kernel,
                                       const FrequencyLattice& lattice) {
  if (d != lattice.d) throw std::invalid_argument("interaction_spectrum: dimension mismatch");
  EmpiricalSpectrum sp;
  sp.lattice = lattice;
  sp.tag = SourceTag::Particles;
  sp.F.assign(lattice.size(), {0.0, 0.0});
  sp.bound_const = 0.0;
  sp.bound_linear = 0.0;
  if (kernel.is_zero()) return sp;

  std::vector<double> u(static_cast<std::size_t>(N) * d);
  particles::empirical_convolution(positions, N, d, L, kernel, u);

  const double s = fourier_const(d);
  std::vector<double> w(N);
  std::vector<std::complex<double>> G(lattice.size());
  const long n = lattice.size();
  double mean_abs_u = 0.0;
  for (int i = 0; i < N; ++i) {
    double r2 = 0.0;
    for (int q = 0; q < d; ++q) r2 += u[i * d + q] * u[i * d + q];
    mean_abs_u += std::sqrt(r2);
  }
  mean_abs_u /= N;

  double xi[2];
  for (int q = 0; q < d; ++q) {
    for (int i = 0; i < N; ++i) w[i] = s * u[i * d + q] / N;
    std::fill(G.begin(), G.end(), std::complex<double>{0.0, 0.0});
    lattice_nudft(positions, N, d, lattice, w, G);
    for (long i = 0; i < n; ++i) {
      lattice.node(i, xi);
      // i * xi_q * G_q
      sp.F[i] += std::complex<double>(0.0, xi[q]) * G[i];
    }
  }
  sp.bound_linear = s * mean_abs_u;
  return sp;
}

std::vector<std::vector<double>> grid_kernel_convolution(
    const meanfield::DensityField& rho, const scenario::KernelSpec& kernel,
    const meanfield::SpectralTransform& tr) {
  const meanfield::Grid& g = rho.grid;
  const long n = g.size();
  std::vector<std::vector<double>> out(g.d, std::vector<double>(n, 0.0));
  if (kernel.is_zero()) return out;

  const std::vector<double> nodes = grid_nodes(g);
  std::vector<std::vector<double>> ksamp(g.d, std::vector<double>(n));
  double kv[2];
  for (long c = 0; c < n; ++c) {
    kernel.eval(std::span<const double>(nodes.data() + c * g.d, g.d),
                std::span<double>(kv, g.d));
    for (int q = 0; q < g.d; ++q) ksamp[q][c] = kv[q];
  }
  std::vector<meanfield::cplx> khat(n), prod(n);
  for (int q = 0; q < g.d; ++q) {
    tr.forward(ksamp[q], khat);
    for (long c = 0; c < n; ++c) prod[c] = khat[c] * rho.spectrum[c];
    tr.inverse(prod, out[q]);
  }
  return out;
}

EmpiricalSpectrum interaction_spectrum_field(const meanfield::DensityField& rho,
                                             const scenario::KernelSpec& kernel,
                                             const meanfield::SpectralTransform& tr,
                                             const FrequencyLattice& lattice) {
  const meanfield::Grid& g = rho.grid;
  if (g.d != lattice.d)
    throw std::invalid_argument("interaction_spectrum_field: dimension mismatch");
  EmpiricalSpectrum sp;
  sp.lattice = lattice;
  sp.tag = SourceTag::Field;
  sp.F.assign(lattice.size(), {0.0, 0.0});
  sp.bound_const = 0.0;
  sp.bound_linear = 0.0;
  if (kernel.is_zero()) return sp;

  const auto conv = grid_kernel_convolution(rho, kernel, tr);
  const long n = g.size();
  const double s = fourier_const(g.d);

  const int n_axis = lattice.per_axis();
  std::vector<int> idx(n_axis);
  for (int i = 0; i < n_axis; ++i) idx[i] = dual_index(lattice.axis[i], g);

  std::vector<double> w(n);
  std::vector<meanfield::cplx> what(n);
  double xi[2];
  for (int q = 0; q < g.d; ++q) {
    for (long c = 0; c < n; ++c) w[c] = conv[q][c] * rho.values[c];
    tr.forward(w, what);
    for (long i = 0; i < lattice.size(); ++i) {
      lattice.node(i, xi);
      long fft_flat;
      if (g.d == 1) {
        fft_flat = idx[i];
      } else {
        fft_flat = static_cast<long>(idx[i / n_axis]) * g.M + idx[i % n_axis];
      }
      sp.F[i] += std::complex<double>(0.0, xi[q]) * (s * what[fft_flat]);
    }
  }
  double env = 0.0;
  for (long c = 0; c < n; ++c) {
    double r2 = 0.0;
    for (int q = 0; q < g.d; ++q) r2 += conv[q][c] * conv[q][c];
    env += std::sqrt(r2) * std::abs(rho.values[c]);
  }
  sp.bound_linear = s * env * g.cell_volume();
  return sp;
}

double pair_test_bilinear(std::span<const double> positions, int N,
                          const meanfield::DensityField& rho,
                          std::span<const scenario::TestFunction> phi,
                          const scenario::KernelSpec& kernel,
                          const meanfield::SpectralTransform& tr) {
  const meanfield::Grid& g = rho.grid;
  const int d = g.d;
  if (static_cast<int>(phi.size()) != d)
    throw std::invalid_argument("pair_test_bilinear: need one test function per component");
  if (kernel.is_zero()) return 0.0;

  const long n = g.size();
  const double vol = g.cell_volume();

  // phi_q at particles and at grid nodes.
  const std::vector<double> nodes = grid_nodes(g);
  std::vector<double> phi_p(static_cast<std::size_t>(N) * d);
  std::vector<double> phi_g(static_cast<std::size_t>(n) * d);
  for (int q = 0; q < d; ++q) {
    for (int i = 0; i < N; ++i)
      phi_p[i * d + q] = phi[q].value(positions.subspan(i * d, d));
    for (long c = 0; c < n; ++c)
      phi_g[c * d + q] = phi[q].value(
          std::span<const double>(nodes.data() + c * d, d));
  }

  // k*mu at particles and at grid nodes (direct empirical sums).
  std::vector<double> u_p(static_cast<std::size_t>(N) * d);
  std::vector<double> u_g(static_cast<std::size_t>(n) * d);
  particles::empirical_convolution(positions, N, d, g.L, kernel, u_p);
  particles::convolution_at(nodes, static_cast<int>(n), positions, N, d, g.L,
                            kernel, u_g);

  // k*rho on the grid (circular spectral convolution) and its trig
  // interpolant at the particles.
  const auto conv = grid_kernel_convolution(rho, kernel, tr);
  std::vector<std::vector<meanfield::cplx>> chat(d,
                                                 std::vector<meanfield::cplx>(n));
  for (int q = 0; q < d; ++q) tr.forward(conv[q], chat[q]);
  const double inv_box = 1.0 / std::pow(2.0 * g.L, d);
  std::vector<double> v_p(static_cast<std::size_t>(N) * d, 0.0);
  for (int i = 0; i < N; ++i) {
    const double* x = positions.data() + static_cast<std::size_t>(i) * d;
    if (d == 1) {
      for (int k = 0; k < g.M; ++k) {
        const std::complex<double> e = std::polar(1.0, g.freq(k) * x[0]);
        v_p[i] += (chat[0][k] * e).real();
      }
      v_p[i] *= inv_box;
    } else {
      for (int k0 = 0; k0 < g.M; ++k0) {
        for (int k1 = 0; k1 < g.M; ++k1) {
          const std::complex<double> e =
              std::polar(1.0, g.freq(k0) * x[0] + g.freq(k1) * x[1]);
          const long f = static_cast<long>(k0) * g.M + k1;
          v_p[2 * i] += (chat[0][f] * e).real();
          v_p[2 * i + 1] += (chat[1][f] * e).real();
        }
      }
      v_p[2 * i] *= inv_box;
      v_p[2 * i + 1] *= inv_box;
    }
  }

  double t_pp = 0.0, t_pf = 0.0, t_fp = 0.0, t_ff = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int q = 0; q < d; ++q) {
      t_pp += phi_p[i * d + q] * u_p[i * d + q];
      t_fp += phi_p[i * d + q] * v_p[i * d + q];
    }
  }
  t_pp /= N;
  t_fp /= N;
  for (long c = 0; c < n; ++c) {
    const double w = rho.values[c] * vol;
    for (int q = 0; q < d; ++q) {
      t_pf += phi_g[c * d + q] * u_g[c * d + q] * w;
      t_ff += phi_g[c * d + q] * conv[q][c] * w;
    }
  }
  return t_pp - t_pf - t_fp + t_ff;
}

}  // namespace fluctlab::sobolev
