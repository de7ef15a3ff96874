#pragma once

#include "fluctlab/coefficients.hpp"
#include "fluctlab/common_noise.hpp"
#include "fluctlab/config.hpp"
#include "fluctlab/kernels.hpp"
#include "fluctlab/rng.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluctlab::particles {

/// Raised when a trajectory produces a non-finite position.
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Positions of N particles at one time, wrapped into [-L, L)^d.
struct ParticleEnsemble {
  int N = 0;
  int d = 1;
  double L = 8.0;
  double t = 0.0;
  int replica = 0;
  std::vector<double> X;  // N*d row-major
  const CommonNoisePath* common = nullptr;  // shared, non-owning
};

/// One idiosyncratic Gaussian substream per particle, so permuting particles
/// permutes their noise with them.
class IdioStreams {
 public:
  IdioStreams(const scenario::RngPlan& plan, int replica, int N);
  explicit IdioStreams(std::vector<std::uint64_t> seeds);

  scenario::GaussianStream& at(int i) { return streams_[i]; }
  int size() const { return static_cast<int>(streams_.size()); }

 private:
  std::vector<scenario::GaussianStream> streams_;
};

/// Samples N initial positions from the configured density.
ParticleEnsemble make_initial_ensemble(const scenario::ScenarioConfig& cfg, int N,
                                       int replica, const CommonNoisePath& path);

/// One Euler-Maruyama step:
///   X' = X - (1/N) sum_j k(X - X_j) dt + sigma(t, X) dB + nu(t, X) dW,
/// wrapped periodically. dB entries are N(0, dt), drawn per particle from its
/// substream; if dB_out is non-null they are copied there (N * sigma.m).
void step_euler(ParticleEnsemble& ens, double dt,
                const scenario::CoefficientSpec& sigma,
                const scenario::CoefficientSpec& nu,
                const scenario::KernelSpec& kernel, IdioStreams& idio,
                std::span<const double> dW, std::vector<double>* dB_out = nullptr);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> snapshots;  // N*d each, at stride + final
  ParticleEnsemble final_state;
};

/// Runs the configured number of steps for one replica at particle count N,
/// storing snapshots every cfg.snapshot_stride steps (plus the final state).
Trajectory run_trajectory(const scenario::ScenarioConfig& cfg, int N, int replica,
                          const CommonNoisePath& path);

}  // namespace fluctlab::particles
