#include "fluctlab/fluct_solver.hpp"

#include "fluctlab/drift_kernels.hpp"
#include "fluctlab/stats.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fluctlab::fluctuation {

using meanfield::cplx;

namespace {

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

WhiteNoiseSample WhiteNoiseSample::draw(const meanfield::Grid& grid, int m,
                                        double dt, scenario::GaussianStream& gs) {
  WhiteNoiseSample s;
  s.m = m;
  s.dt = dt;
  s.xi.resize(static_cast<std::size_t>(grid.size()) * m);
  const double sd = 1.0 / std::sqrt(dt * grid.cell_volume());
  gs.normal_fill(s.xi, sd);
  return s;
}

FluctSolver::FluctSolver(const meanfield::Grid& grid,
                         const scenario::KernelSpec& kernel,
                         const scenario::CoefficientSpec& sigma,
                         const scenario::CoefficientSpec& nu)
    : grid_(grid), tr_(grid), kernel_(kernel), sigma_(sigma), nu_(nu) {
  const long n = grid_.size();
  const int M = grid_.M;
  const int d = grid_.d;
  xi0_.resize(n);
  xi1_.assign(n, 0.0);
  mask_.resize(n);
  const int keep = M / 3;
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
  // The forcing needs per-cell sigma even in the constant case only when
  // modulated; store phases whenever the modulation is active.
  if (sigma_var_) sigma_phase_ = cell_phases(sigma_);
  if (nu_var_) nu_phase_ = cell_phases(nu_);

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

std::vector<double> FluctSolver::filtered_values(std::span<const cplx> spec) const {
  const long n = grid_.size();
  std::vector<cplx> tmp(n);
  for (long i = 0; i < n; ++i) tmp[i] = spec[i] * mask_[i];
  std::vector<double> out(n);
  tr_.inverse(tmp, out);
  return out;
}

std::vector<std::vector<double>> FluctSolver::convolve(
    std::span<const cplx> spec) const {
  const int d = grid_.d;
  const long n = grid_.size();
  std::vector<std::vector<double>> out(d, std::vector<double>(n, 0.0));
  if (kernel_.is_zero()) return out;
  std::vector<cplx> prod(n);
  const size_t ncomp = khat_.size();
  for (size_t q = 0; q < ncomp; ++q) {
    for (long i = 0; i < n; ++i) prod[i] = khat_[q][i] * spec[i] * mask_[i];
    tr_.inverse(prod, out[q]);
  }
  for (int q = static_cast<int>(ncomp); q < d; ++q) out[q] = out[0];
  return out;
}

void FluctSolver::step(meanfield::DensityField& eta,
                       const meanfield::DensityField& rho, double dt,
                       std::span<const double> dW,
                       const WhiteNoiseSample* forcing) const {
  const long n = grid_.size();
  const int d = grid_.d;
  assert(static_cast<long>(eta.spectrum.size()) == n);
  assert(static_cast<long>(rho.spectrum.size()) == n);
  const bool use_dw = !nu_.is_zero();
  if (use_dw) assert(static_cast<int>(dW.size()) == nu_.m);
  const double t = eta.t;

  const bool sigma_zero = sigma_.is_zero();
  const bool do_force = forcing != nullptr && !sigma_zero;
  const bool any_explicit = !kernel_.is_zero() || sigma_var_ || nu_var_ || do_force;

  std::vector<cplx> expl;
  std::vector<double> eta_f;
  std::vector<double> work(any_explicit ? n : 0);
  std::vector<cplx> what(any_explicit ? n : 0);
  if (any_explicit) expl.assign(n, cplx(0.0, 0.0));

  constexpr cplx I(0.0, 1.0);

  if (!kernel_.is_zero()) {
    // Linearized interaction: + div(eta (k*rho)) + div(rho (k*eta)).
    eta_f = filtered_values(eta.spectrum);
    const std::vector<double> rho_f = filtered_values(rho.spectrum);
    const auto u = convolve(rho.spectrum);  // k*rho
    const auto v = convolve(eta.spectrum);  // k*eta
    for (int q = 0; q < d; ++q) {
      for (long i = 0; i < n; ++i)
        work[i] = u[q][i] * eta_f[i] + v[q][i] * rho_f[i];
      tr_.forward(work, what);
      const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
      for (long i = 0; i < n; ++i) expl[i] += I * xq[i] * what[i] * mask_[i] * dt;
    }
  }

  if (sigma_var_ || nu_var_) {
    if (eta_f.empty()) eta_f = filtered_values(eta.spectrum);
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
          work[i] = (gs * fs[i] + gn * fn[i]) * eta_f[i];
        tr_.forward(work, what);
        const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
        const std::vector<double>& xp = (p == 0) ? xi0_ : xi1_;
        const double count = (p == q) ? 1.0 : 2.0;
        for (long i = 0; i < n; ++i)
          expl[i] += -0.5 * count * xq[i] * xp[i] * what[i] * mask_[i] * dt;
      }

    if (nu_var_ && use_dw) {
      double beta_var[2] = {0.0, 0.0};
      for (int q = 0; q < d; ++q)
        for (int l = 0; l < nu_.m; ++l)
          beta_var[q] += nu_.base[static_cast<size_t>(q) * nu_.m + l] * dW[l];
      for (int q = 0; q < d; ++q) {
        if (beta_var[q] == 0.0) continue;
        for (long i = 0; i < n; ++i) {
          const double s = std::sin(nu_phase_[i] + nu_.tau * t);
          work[i] = -beta_var[q] * nu_.eps * s * eta_f[i];
        }
        tr_.forward(work, what);
        const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
        for (long i = 0; i < n; ++i) expl[i] += I * xq[i] * what[i] * mask_[i];
      }
    }
  }

  if (do_force) {
    // - div(sqrt(rho^+) sigma xi_step) dt; unfiltered so the grid pairing
    // variance reproduces dt <|sigma^T grad phi|^2, rho> exactly.
    assert(forcing->m == sigma_.m &&
           static_cast<long>(forcing->xi.size()) == n * sigma_.m);
    const int m = sigma_.m;
    std::vector<double> sqrt_rho(n);
    for (long i = 0; i < n; ++i)
      sqrt_rho[i] = std::sqrt(std::max(rho.values[i], 0.0));
    for (int q = 0; q < d; ++q) {
      for (long i = 0; i < n; ++i) {
        const double mod =
            sigma_var_ ? 1.0 + sigma_.eps * std::sin(sigma_phase_[i] + sigma_.tau * t)
                       : 1.0;
        double s = 0.0;
        for (int l = 0; l < m; ++l)
          s += sigma_.base[static_cast<size_t>(q) * m + l] *
               forcing->xi[static_cast<std::size_t>(i) * m + l];
        work[i] = sqrt_rho[i] * mod * s;
      }
      tr_.forward(work, what);
      const std::vector<double>& xq = (q == 0) ? xi0_ : xi1_;
      for (long i = 0; i < n; ++i) expl[i] += -I * xq[i] * what[i] * dt;
    }
  }

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
    eta.spectrum[i] = g * (eta.spectrum[i] + e);
  }

  tr_.inverse(eta.spectrum, eta.values);
  eta.t = t + dt;

  for (double v : eta.values) {
    if (!std::isfinite(v))
      throw meanfield::StabilityError(
          "fluctuation step unstable (non-finite field); retry with dt <= " +
              std::to_string(dt / 2),
          dt / 2);
  }
}

meanfield::DensityField initial_fluctuation(std::span<const double> positions,
                                            int N,
                                            const meanfield::DensityField& rho0,
                                            const meanfield::SpectralTransform& tr) {
  const meanfield::Grid& g = rho0.grid;
  const int M = g.M;
  const double sqrtN = std::sqrt(static_cast<double>(N));

  // Exact empirical Fourier coefficients on the resolved dual modes, laid out
  // over the ascending centered ladder n = -(M/2-1) .. (M/2-1).
  const int K = M / 2 - 1;
  const int F = 2 * K + 1;
  const double dxi = g.dual_spacing();
  const double xi_lo = -K * dxi;
  std::vector<double> w(N, 1.0 / N);

  meanfield::DensityField eta;
  eta.grid = g;
  eta.t = rho0.t;
  eta.spectrum.assign(g.size(), cplx(0.0, 0.0));
  eta.values.assign(g.size(), 0.0);

  auto fft_index = [M](int ncen) { return ncen >= 0 ? ncen : ncen + M; };

  if (g.d == 1) {
    std::vector<cplx> emp(F, cplx(0.0, 0.0));
    particles::nudft_1d(positions, w, xi_lo, dxi, emp);
    for (int j = 0; j < F; ++j) {
      const int ncen = -K + j;
      const long idx = fft_index(ncen);
      eta.spectrum[idx] = sqrtN * (emp[j] - rho0.spectrum[idx]);
    }
  } else {
    std::vector<cplx> emp(static_cast<std::size_t>(F) * F, cplx(0.0, 0.0));
    particles::nudft_2d(positions, N, w, xi_lo, dxi, F, xi_lo, dxi, F, emp);
    for (int j0 = 0; j0 < F; ++j0)
      for (int j1 = 0; j1 < F; ++j1) {
        const long idx = static_cast<long>(fft_index(-K + j0)) * M +
                         fft_index(-K + j1);
        eta.spectrum[idx] =
            sqrtN * (emp[static_cast<std::size_t>(j0) * F + j1] -
                     rho0.spectrum[idx]);
      }
  }
  tr.inverse(eta.spectrum, eta.values);
  return eta;
}

ConditionalMomentSeries conditional_moments(
    const FluctSolver& solver,
    const std::vector<meanfield::DensityField>& rho_path,
    const particles::CommonNoisePath& path, const scenario::TestFunction& phi,
    int R, const scenario::RngPlan& plan) {
  if (R < 100)
    throw std::invalid_argument(
        "conditional_moments: R must be >= 100 for variance claims");
  const int n_steps = path.n_steps;
  if (static_cast<int>(rho_path.size()) != n_steps + 1)
    throw std::invalid_argument(
        "conditional_moments: rho_path must hold n_steps + 1 fields");

  const meanfield::Grid& grid = solver.grid();
  const meanfield::TabulatedPhi tphi = meanfield::tabulate(grid, phi);
  const double dt = path.dt;

  std::vector<std::vector<double>> pairings(
      n_steps + 1, std::vector<double>(R, 0.0));

  for (int r = 0; r < R; ++r) {
    scenario::GaussianStream ws(plan.white_noise_seed(r));
    meanfield::DensityField eta;
    eta.grid = grid;
    eta.t = rho_path[0].t;
    eta.values.assign(grid.size(), 0.0);
    eta.spectrum.assign(grid.size(), cplx(0.0, 0.0));
    pairings[0][r] = 0.0;
    for (int s = 0; s < n_steps; ++s) {
      const WhiteNoiseSample xi =
          WhiteNoiseSample::draw(grid, solver.noise_components(), dt, ws);
      solver.step(eta, rho_path[s], dt, path.increment(s), &xi);
      pairings[s + 1][r] = meanfield::pair_values(eta, tphi.phi);
    }
  }

  ConditionalMomentSeries out;
  out.times.resize(n_steps + 1);
  out.mean.resize(n_steps + 1);
  out.mean_se.resize(n_steps + 1);
  out.var.resize(n_steps + 1);
  out.var_se.resize(n_steps + 1);
  for (int s = 0; s <= n_steps; ++s) {
    out.times[s] = rho_path[0].t + s * dt;
    const std::vector<double>& col = pairings[s];
    out.mean[s] = statlab::sample_mean(col);
    out.mean_se[s] = statlab::mean_se(col);
    out.var[s] = statlab::sample_variance(col);
    out.var_se[s] = statlab::jackknife_variance_se(col);
  }
  return out;
}

}  // namespace fluctlab::fluctuation
