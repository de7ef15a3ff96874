#include "fluctlab/martingales.hpp"

#include <cmath>
#include <stdexcept>

namespace fluctlab::particles {

MartingaleAccumulator::MartingaleAccumulator(
    std::vector<scenario::TestFunction> phis,
    const scenario::CoefficientSpec& sigma, const scenario::CoefficientSpec& nu)
    : phis_(std::move(phis)), sigma_(sigma), nu_(nu) {
  const int P = static_cast<int>(phis_.size());
  ledger_.series.resize(P);
  for (int p = 0; p < P; ++p) {
    ledger_.series[p].phi_name = phis_[p].name;
    ledger_.series[p].M.push_back(0.0);
    ledger_.series[p].Mhat.push_back(0.0);
    ledger_.series[p].Q.push_back(0.0);
  }
  ledger_.times.push_back(0.0);
  ledger_.cov_predictor.assign(static_cast<std::size_t>(P) * P, 0.0);
}

void MartingaleAccumulator::tabulate(const meanfield::Grid& grid) {
  const int P = static_cast<int>(phis_.size());
  const long n = grid.size();
  grid_dphi_.assign(P, std::vector<double>(static_cast<std::size_t>(grid.d) * n));
  double x[2];
  double g[2];
  for (int p = 0; p < P; ++p) {
    for (long c = 0; c < n; ++c) {
      if (grid.d == 1) {
        x[0] = grid.node(static_cast<int>(c));
      } else {
        x[0] = grid.node(static_cast<int>(c / grid.M));
        x[1] = grid.node(static_cast<int>(c % grid.M));
      }
      phis_[p].gradient(x, g);
      for (int q = 0; q < grid.d; ++q) grid_dphi_[p][q * n + c] = g[q];
    }
  }
  tabulated_ = true;
}

void MartingaleAccumulator::accumulate(const ParticleEnsemble& before,
                                       const meanfield::DensityField& rho_before,
                                       std::span<const double> dB,
                                       std::span<const double> dW, double dt) {
  const meanfield::Grid& grid = rho_before.grid;
  if (!tabulated_) tabulate(grid);
  const int P = static_cast<int>(phis_.size());
  const int N = before.N;
  const int d = before.d;
  const int m = sigma_.m;
  const double t = before.t;
  const bool nu_zero = nu_.is_zero();
  const int mn = nu_.m;
  const double sqrtN = std::sqrt(static_cast<double>(N));

  double sig[4];
  double nuv[4];
  const bool sigma_const = sigma_.is_constant();
  const bool nu_const = nu_.is_constant();
  const std::span<const double> x_first{before.X.data(),
                                        static_cast<std::size_t>(d)};
  if (sigma_const)
    sigma_.eval(t, x_first, std::span<double>(sig, static_cast<std::size_t>(d * m)));
  if (nu_const && !nu_zero)
    nu_.eval(t, x_first, std::span<double>(nuv, static_cast<std::size_t>(d * mn)));

  // Per-particle pass: M and Q increments, plus the particle side of the
  // eta-pairings <nu^{q,l} d_q phi, eta> = sqrtN (mean_i f - <f, rho>).
  std::vector<double> m_inc(P, 0.0);
  std::vector<double> q_inc(P, 0.0);
  std::vector<double> pmean(static_cast<std::size_t>(P) * d * mn, 0.0);
  double g[2];
  double sg[2];
  for (int i = 0; i < N; ++i) {
    const std::span<const double> x{
        before.X.data() + static_cast<std::size_t>(i) * d,
        static_cast<std::size_t>(d)};
    if (!sigma_const)
      sigma_.eval(t, x, std::span<double>(sig, static_cast<std::size_t>(d * m)));
    if (!nu_const && !nu_zero)
      nu_.eval(t, x, std::span<double>(nuv, static_cast<std::size_t>(d * mn)));
    const double* dBi = dB.data() + static_cast<std::size_t>(i) * m;
    for (int p = 0; p < P; ++p) {
      phis_[p].gradient(x, g);
      for (int l = 0; l < m; ++l) {
        double s = 0.0;
        for (int q = 0; q < d; ++q) s += sig[q * m + l] * g[q];
        sg[l] = s;
      }
      for (int l = 0; l < m; ++l) {
        m_inc[p] += sg[l] * dBi[l];
        q_inc[p] += sg[l] * sg[l];
      }
      if (!nu_zero) {
        double* pm = pmean.data() + static_cast<std::size_t>(p) * d * mn;
        for (int q = 0; q < d; ++q) {
          for (int l = 0; l < mn; ++l) pm[q * mn + l] += nuv[q * mn + l] * g[q];
        }
      }
    }
  }

  // Grid pass: <nu^{q,l} d_q phi, rho> and the covariance predictor
  // sum_l <(sigma^T grad phi_a)_l (sigma^T grad phi_b)_l, rho>.
  const long n = grid.size();
  const double vol = grid.cell_volume();
  std::vector<double> gmean(static_cast<std::size_t>(P) * d * mn, 0.0);
  std::vector<double> cov_step(static_cast<std::size_t>(P) * P, 0.0);
  std::vector<double> sgrid(static_cast<std::size_t>(P) * m);
  double xc[2];
  for (long c = 0; c < n; ++c) {
    const double w = rho_before.values[c] * vol;
    if (!sigma_const || (!nu_const && !nu_zero)) {
      if (grid.d == 1) {
        xc[0] = grid.node(static_cast<int>(c));
      } else {
        xc[0] = grid.node(static_cast<int>(c / grid.M));
        xc[1] = grid.node(static_cast<int>(c % grid.M));
      }
      if (!sigma_const) sigma_.eval(t, xc, sig);
      if (!nu_const && !nu_zero) nu_.eval(t, xc, nuv);
    }
    for (int p = 0; p < P; ++p) {
      const double* dphi = grid_dphi_[p].data();
      for (int l = 0; l < m; ++l) {
        double s = 0.0;
        for (int q = 0; q < d; ++q) s += sig[q * m + l] * dphi[q * n + c];
        sgrid[p * m + l] = s;
      }
      if (!nu_zero) {
        double* gm = gmean.data() + static_cast<std::size_t>(p) * d * mn;
        for (int q = 0; q < d; ++q) {
          for (int l = 0; l < mn; ++l) gm[q * mn + l] += nuv[q * mn + l] * dphi[q * n + c] * w;
        }
      }
    }
    for (int a = 0; a < P; ++a) {
      for (int b = a; b < P; ++b) {
        double s = 0.0;
        for (int l = 0; l < m; ++l) s += sgrid[a * m + l] * sgrid[b * m + l];
        cov_step[a * P + b] += s * w;
      }
    }
  }

  for (int p = 0; p < P; ++p) {
    MartingaleLedger::Series& se = ledger_.series[p];
    se.M.push_back(se.M.back() + m_inc[p] / sqrtN);
    se.Q.push_back(se.Q.back() + dt * q_inc[p] / N);
    double mhat_inc = 0.0;
    if (!nu_zero) {
      const double* pm = pmean.data() + static_cast<std::size_t>(p) * d * mn;
      const double* gm = gmean.data() + static_cast<std::size_t>(p) * d * mn;
      for (int q = 0; q < d; ++q) {
        for (int l = 0; l < mn; ++l) {
          const double pairing = sqrtN * (pm[q * mn + l] / N - gm[q * mn + l]);
          mhat_inc += pairing * dW[l];
        }
      }
    }
    se.Mhat.push_back(se.Mhat.back() + mhat_inc);
  }
  for (int a = 0; a < P; ++a) {
    for (int b = a; b < P; ++b) {
      ledger_.cov_predictor[a * P + b] += dt * cov_step[a * P + b];
      if (b != a) ledger_.cov_predictor[b * P + a] = ledger_.cov_predictor[a * P + b];
    }
  }
  ledger_.times.push_back(t + dt);
}

}  // namespace fluctlab::particles
