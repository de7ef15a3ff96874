#include "fluctlab/fp_solver.hpp"

#include <cassert>
#include <cmath>
#include <complex>

namespace fluctlab::meanfield {
namespace {

// Gram = C * C^T for a row-major d x m matrix, into out[4] (row-major d x d).
void gram(const std::vector<double>& c, int d, int m, double out[4]) {
  for (int q = 0; q < d; ++q)
    for (int p = 0; p < d; ++p) {
      double s = 0.0;
      for (int l = 0; l < m; ++l)
        s += c[static_cast<size_t>(q) * m + l] * c[static_cast<size_t>(p) * m + l];
      out[q * 2 + p] = s;
    }
}

}  // namespace

FpSolver::FpSolver(const Grid& grid, const scenario::KernelSpec& kernel,
                   const scenario::CoefficientSpec& sigma,
                   const scenario::CoefficientSpec& nu)
    : grid_(grid), tr_(grid), kernel_(kernel), sigma_(sigma), nu_(nu) {
  const long n = grid_.size();
  const int M = grid_.M;
  const int d = grid_.d;
  xi0_.resize(n);
  xi1_.assign(n, 0.0);
  mask_.resize(n);
  const int keep = M / 3;  // 2/3 rule: retain |centered index| <= M/3
  if (d == 1) {
    for (int k = 0; k < M; ++k) {
      xi0_[k] = grid_.freq(k);
      mask_[k] = std::abs(grid_.centered(k)) <= keep ? 1.0 : 0.0;
    }
  } else {
    for (int k0 = 0; k0 < M; ++k0)
      for (int k1 = 0; k1 < M; ++k1) {
        const long idx = grid_.index(k0, k1);
        xi0_[idx] = grid_.freq(k0);
        xi1_[idx] = grid_.freq(k1);
        mask_[idx] = (std::abs(grid_.centered(k0)) <= keep &&
                      std::abs(grid_.centered(k1)) <= keep)
                         ? 1.0
                         : 0.0;
      }
  }

  gram(sigma_.base, d, sigma_.m, gram_sigma_);
  gram(nu_.base, d, nu_.m, gram_nu_);
  qf_sigma_.resize(n);
  for (long i = 0; i < n; ++i) {
    const double x0 = xi0_[i], x1 = xi1_[i];
    qf_sigma_[i] = gram_sigma_[0] * x0 * x0 + 2.0 * gram_sigma_[1] * x0 * x1 +
                   gram_sigma_[3] * x1 * x1;
  }

  sigma_var_ = !sigma_.is_constant() && sigma_.eps != 0.0;
  nu_var_ = !nu_.is_constant() && nu_.eps != 0.0;
  auto cell_phases = [&](const scenario::CoefficientSpec& c) {
    std::vector<double> ph(n, 0.0);
    if (d == 1) {
      for (int j = 0; j < M; ++j) ph[j] = c.omega[0] * grid_.node(j);
    } else {
      for (int j0 = 0; j0 < M; ++j0)
        for (int j1 = 0; j1 < M; ++j1)
          ph[grid_.index(j0, j1)] =
              c.omega[0] * grid_.node(j0) + c.omega[1] * grid_.node(j1);
    }
    return ph;
  };
  if (sigma_var_) sigma_phase_ = cell_phases(sigma_);
  if (nu_var_) nu_phase_ = cell_phases(nu_);

  // Kernel spectral multipliers from min-image grid samples. The catalogue
  // kernels apply one isotropic profile to every component, so a single
  // multiplier serves all d components; custom closures get one per component.
  if (!kernel_.is_zero()) {
    const int ncomp = kernel_.custom ? d : 1;
    std::vector<double> samples(n);
    std::vector<double> dx(d);
    std::vector<double> kval(d);
    khat_.assign(ncomp, std::vector<cplx>(n));
    for (int q = 0; q < ncomp; ++q) {
      if (d == 1) {
        for (int j = 0; j < M; ++j) {
          dx[0] = grid_.node(j);
          kernel_.eval(dx, kval);
          samples[j] = kval[q];
        }
      } else {
        for (int j0 = 0; j0 < M; ++j0)
          for (int j1 = 0; j1 < M; ++j1) {
            dx[0] = grid_.node(j0);
            dx[1] = grid_.node(j1);
            kernel_.eval(dx, kval);
            samples[grid_.index(j0, j1)] = kval[q];
          }
      }
      tr_.forward(samples, khat_[q]);
    }
  }
}

std::vector<double> FpSolver::filtered_values(std::span<const cplx> spec) const {
  const long n = grid_.size();
  std::vector<cplx> tmp(n);
  for (long i = 0; i < n; ++i) tmp[i] = spec[i] * mask_[i];
  std::vector<double> out(n);
  tr_.inverse(tmp, out);
  return out;
}

std::vector<std::vector<double>> FpSolver::convolve(const DensityField& rho) const {
  const int d = grid_.d;
  const long n = grid_.size();
  std::vector<std::vector<double>> out(d, std::vector<double>(n, 0.0));
  if (kernel_.is_zero()) return out;
  std::vector<cplx> prod(n);
  const size_t ncomp = khat_.size();
  for (size_t q = 0; q < ncomp; ++q) {
    // Integral convention: the grid transform of a periodic convolution is
    // the plain product of the two transforms.
    for (long i = 0; i < n; ++i)
      prod[i] = khat_[q][i] * rho.spectrum[i] * mask_[i];
    tr_.inverse(prod, out[q]);
  }
  for (int q = static_cast<int>(ncomp); q < d; ++q) out[q] = out[0];
  return out;
}

double FpSolver::implicit_factor(long mode, double dt) const {
  return std::exp(-0.5 * qf_sigma_[mode] * dt);
}

StepDiagnostics FpSolver::step(DensityField& rho, double dt,
                               std::span<const double> dW) const {
  const long n = grid_.size();
  const int d = grid_.d;
  assert(static_cast<long>(rho.spectrum.size()) == n);
  const bool use_dw = !nu_.is_zero();
  if (use_dw) assert(static_cast<int>(dW.size()) == nu_.m);
  const double t = rho.t;

  const bool any_explicit = !kernel_.is_zero() || sigma_var_ || nu_var_;
  std::vector<cplx> expl;
  std::vector<double> rho_f;
  std::vector<double> work(any_explicit ? n : 0);
  std::vector<cplx> what(any_explicit ? n : 0);
  if (any_explicit) {
    expl.assign(n, cplx(0.0, 0.0));
    rho_f = filtered_values(rho.spectrum);
  }

  constexpr cplx I(0.0, 1.0);

  if (!kernel_.is_zero()) {
    // + div((k*rho) rho) dt, one divergence component at a time.
    const auto u = convolve(rho);
    for (int q = 0; q < d; ++q) {
      for (long i = 0; i < n; ++i) work[i] = u[q][i] * rho_f[i];
      tr_.forward(work, what);
      const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
      for (long i = 0; i < n; ++i)
        expl[i] += I * xq[i] * what[i] * mask_[i] * dt;
    }
  }

  if (sigma_var_ || nu_var_) {
    // Per-cell scalar factors of the variable Gram parts:
    //   sigma sigma^T - sigma_bar sigma_bar^T = G_sigma ((1+eps s)^2 - 1)
    //   nu_var nu_var^T                       = G_nu (eps s)^2.
    // The mixed nu_bar/nu_var Ito terms are generated by the product of the
    // exact phase with the explicit transport term, so only the pure
    // variable part appears here.
    std::vector<double> fs(n, 0.0), fn(n, 0.0);
    if (sigma_var_)
      for (long i = 0; i < n; ++i) {
        const double s = std::sin(sigma_phase_[i] + sigma_.tau * t);
        const double e = sigma_.eps * s;
        fs[i] = 2.0 * e + e * e;
      }
    if (nu_var_)
      for (long i = 0; i < n; ++i) {
        const double e = nu_.eps * std::sin(nu_phase_[i] + nu_.tau * t);
        fn[i] = e * e;
      }
    for (int q = 0; q < d; ++q)
      for (int p = q; p < d; ++p) {
        const double gs = gram_sigma_[q * 2 + p];
        const double gn = gram_nu_[q * 2 + p];
        if (gs == 0.0 && gn == 0.0) continue;
        for (long i = 0; i < n; ++i)
          work[i] = (gs * fs[i] + gn * fn[i]) * rho_f[i];
        tr_.forward(work, what);
        const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
        const std::vector<double>& xp = (p == 0) ? xi0_ : xi1_;
        const double count = (p == q) ? 1.0 : 2.0;  // symmetric pair
        for (long i = 0; i < n; ++i)
          expl[i] += -0.5 * count * xq[i] * xp[i] * what[i] * mask_[i] * dt;
      }

    if (nu_var_ && use_dw) {
      // - div(nu_var rho) dW; nu_var^{q,l}(x) = base^{q,l} eps s(x).
      double beta_var[2] = {0.0, 0.0};
      for (int q = 0; q < d; ++q)
        for (int l = 0; l < nu_.m; ++l)
          beta_var[q] += nu_.base[static_cast<size_t>(q) * nu_.m + l] * dW[l];
      for (int q = 0; q < d; ++q) {
        if (beta_var[q] == 0.0) continue;
        for (long i = 0; i < n; ++i) {
          const double s = std::sin(nu_phase_[i] + nu_.tau * t);
          work[i] = -beta_var[q] * nu_.eps * s * rho_f[i];
        }
        tr_.forward(work, what);
        const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
        for (long i = 0; i < n; ++i)
          expl[i] += I * xq[i] * what[i] * mask_[i];
      }
    }
  }

  // Constant part: exact translation by nu_bar dW and exact damping by the
  // constant sigma diffusion.
  double beta[2] = {0.0, 0.0};
  if (use_dw)
    for (int q = 0; q < d; ++q)
      for (int l = 0; l < nu_.m; ++l)
        beta[q] += nu_.base[static_cast<size_t>(q) * nu_.m + l] * dW[l];

  for (long i = 0; i < n; ++i) {
    const double phase = -(xi0_[i] * beta[0] + xi1_[i] * beta[1]);
    const double damp = std::exp(-0.5 * qf_sigma_[i] * dt);
    const cplx g = damp * cplx(std::cos(phase), std::sin(phase));
    const cplx e = any_explicit ? expl[i] : cplx(0.0, 0.0);
    rho.spectrum[i] = g * (rho.spectrum[i] + e);
  }

  tr_.inverse(rho.spectrum, rho.values);
  rho.t = t + dt;

  double vmin = rho.values[0], vmax = rho.values[0];
  for (double v : rho.values) {
    vmin = std::min(vmin, v);
    vmax = std::max(vmax, v);
  }
  if (!(std::isfinite(vmin) && std::isfinite(vmax)) ||
      (vmin < 0.0 && -vmin > 0.1 * vmax))
    throw StabilityError(
        "density step unstable (|min| > 0.1*max); retry with dt <= " +
            std::to_string(dt / 2),
        dt / 2);

  StepDiagnostics diag;
  diag.mass_drift = std::abs(rho.spectrum[0].real() - 1.0);
  if (diag.mass_drift > 1e-10) {
    const double scale = 1.0 / rho.spectrum[0].real();
    for (long i = 0; i < n; ++i) rho.spectrum[i] *= scale;
    for (long i = 0; i < n; ++i) rho.values[i] *= scale;
    diag.renormalized = true;
  }
  return diag;
}

}  // namespace fluctlab::meanfield
