#include "fluctlab/dynamics.hpp"

#include "fluctlab/drift_kernels.hpp"
#include "fluctlab/grid.hpp"

#include <cmath>
#include <cstdio>

namespace fluctlab::particles {

IdioStreams::IdioStreams(const scenario::RngPlan& plan, int replica, int N) {
  streams_.reserve(N);
  for (int i = 0; i < N; ++i) {
    streams_.emplace_back(plan.idio_seed(replica, i));
  }
}

IdioStreams::IdioStreams(std::vector<std::uint64_t> seeds) {
  streams_.reserve(seeds.size());
  for (std::uint64_t s : seeds) streams_.emplace_back(s);
}

ParticleEnsemble make_initial_ensemble(const scenario::ScenarioConfig& cfg, int N,
                                       int replica, const CommonNoisePath& path) {
  ParticleEnsemble ens;
  ens.N = N;
  ens.d = cfg.d;
  ens.L = cfg.L;
  ens.t = 0.0;
  ens.replica = replica;
  ens.common = &path;
  ens.X.resize(static_cast<std::size_t>(N) * cfg.d);
  scenario::GaussianStream init(cfg.rng_plan().init_seed(replica));
  cfg.rho0.sample(N, cfg.L, init, ens.X);
  return ens;
}

void step_euler(ParticleEnsemble& ens, double dt,
                const scenario::CoefficientSpec& sigma,
                const scenario::CoefficientSpec& nu,
                const scenario::KernelSpec& kernel, IdioStreams& idio,
                std::span<const double> dW, std::vector<double>* dB_out) {
  const int N = ens.N;
  const int d = ens.d;
  const int m = sigma.m;
  const double sqrt_dt = std::sqrt(dt);

  static thread_local std::vector<double> drift;
  if (!kernel.is_zero()) {
    drift.resize(static_cast<std::size_t>(N) * d);
    pairwise_drift(ens.X, N, d, ens.L, kernel, drift);
  }

  if (dB_out) dB_out->resize(static_cast<std::size_t>(N) * m);

  double sig[4];
  double nuv[4];
  const bool sigma_const = sigma.is_constant();
  const bool nu_const = nu.is_constant();
  const std::span<const double> x0{ens.X.data(), static_cast<std::size_t>(d)};
  if (sigma_const)
    sigma.eval(ens.t, x0, std::span<double>(sig, static_cast<std::size_t>(d * m)));
  const bool nu_zero = nu.is_zero();
  if (nu_const && !nu_zero)
    nu.eval(ens.t, x0, std::span<double>(nuv, static_cast<std::size_t>(d * nu.m)));

  double dB[2];
  for (int i = 0; i < N; ++i) {
    double* x = ens.X.data() + static_cast<std::size_t>(i) * d;
    scenario::GaussianStream& gs = idio.at(i);
    for (int l = 0; l < m; ++l) dB[l] = sqrt_dt * gs.normal();
    if (dB_out) {
      for (int l = 0; l < m; ++l) (*dB_out)[static_cast<std::size_t>(i) * m + l] = dB[l];
    }
    const std::span<const double> xi{x, static_cast<std::size_t>(d)};
    if (!sigma_const)
      sigma.eval(ens.t, xi, std::span<double>(sig, static_cast<std::size_t>(d * m)));
    if (!nu_const && !nu_zero)
      nu.eval(ens.t, xi, std::span<double>(nuv, static_cast<std::size_t>(d * nu.m)));

    for (int q = 0; q < d; ++q) {
      double v = x[q];
      if (!kernel.is_zero()) v += drift[static_cast<std::size_t>(i) * d + q] * dt;
      for (int l = 0; l < m; ++l) v += sig[q * m + l] * dB[l];
      if (!nu_zero) {
        for (int l = 0; l < nu.m; ++l) v += nuv[q * nu.m + l] * dW[l];
      }
      if (!std::isfinite(v)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "non-finite position (replica %d, particle %d, t=%.6g)",
                      ens.replica, i, ens.t);
        throw SimulationError(buf);
      }
      x[q] = meanfield::wrap(v, ens.L);
    }
  }
  ens.t += dt;
}

Trajectory run_trajectory(const scenario::ScenarioConfig& cfg, int N, int replica,
                          const CommonNoisePath& path) {
  Trajectory traj;
  traj.final_state = make_initial_ensemble(cfg, N, replica, path);
  ParticleEnsemble& ens = traj.final_state;
  IdioStreams idio(cfg.rng_plan(), replica, N);
  const double dt = cfg.T / cfg.n_steps;

  traj.times.push_back(0.0);
  traj.snapshots.push_back(ens.X);
  for (int s = 0; s < cfg.n_steps; ++s) {
    step_euler(ens, dt, cfg.sigma, cfg.nu, cfg.kernel, idio, path.increment(s));
    const bool last = (s + 1 == cfg.n_steps);
    if (last || (s + 1) % cfg.snapshot_stride == 0) {
      traj.times.push_back(ens.t);
      traj.snapshots.push_back(ens.X);
    }
  }
  return traj;
}

}  // namespace fluctlab::particles
