#pragma once

#include "fluctlab/common_noise.hpp"
#include "fluctlab/config.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/fp_solver.hpp"

#include <span>
#include <vector>

namespace fluctlab::fluctuation {

/// One step's discretized space-time white noise: i.i.d. N(0, 1/(dt * cell
/// volume)) per grid cell and noise component, independent across steps.
struct WhiteNoiseSample {
  int m = 1;
  double dt = 0.0;
  std::vector<double> xi;  // grid.size() * m, cell-major

  static WhiteNoiseSample draw(const meanfield::Grid& grid, int m, double dt,
                               scenario::GaussianStream& gs);
};

/// Semi-implicit spectral solver for the limiting linear fluctuation SPDE
///   d eta = [div(eta (k*rho)) + div(rho (k*eta))
///            + (1/2) sum_ij d_i d_j ((sigma sigma^T + nu nu^T)_ij eta)] dt
///           - div(nu eta dW) - div(sqrt(rho^+) sigma xi) dt,
/// driven by the same common-noise path and density trajectory as the
/// meanfield solver. The constant coefficient part advances by the exact
/// per-mode factor; interactions, variable-coefficient remainders and the
/// forcing enter explicitly with 2/3-rule dealiasing on products.
class FluctSolver {
 public:
  FluctSolver(const meanfield::Grid& grid, const scenario::KernelSpec& kernel,
              const scenario::CoefficientSpec& sigma,
              const scenario::CoefficientSpec& nu);

  /// Advances eta by one step using the density at the step start. forcing
  /// may be null (no white-noise term, e.g. sigma = 0). The total integral
  /// <eta, 1> is conserved exactly (every term is divergence-form).
  void step(meanfield::DensityField& eta, const meanfield::DensityField& rho,
            double dt, std::span<const double> dW,
            const WhiteNoiseSample* forcing) const;

  const meanfield::Grid& grid() const { return grid_; }
  const meanfield::SpectralTransform& transform() const { return tr_; }
  /// Number of white-noise components the forcing consumes (= sigma's m).
  int noise_components() const { return sigma_.m; }

 private:
  std::vector<std::vector<double>> convolve(std::span<const meanfield::cplx> spec) const;
  std::vector<double> filtered_values(std::span<const meanfield::cplx> spec) const;

  meanfield::Grid grid_;
  meanfield::SpectralTransform tr_;
  scenario::KernelSpec kernel_;
  scenario::CoefficientSpec sigma_;
  scenario::CoefficientSpec nu_;

  std::vector<double> xi0_, xi1_, mask_;
  double gram_sigma_[4] = {0, 0, 0, 0};
  double gram_nu_[4] = {0, 0, 0, 0};
  std::vector<double> qf_sigma_;
  bool sigma_var_ = false;
  bool nu_var_ = false;
  std::vector<double> sigma_phase_, nu_phase_;
  std::vector<std::vector<meanfield::cplx>> khat_;
};

/// Band-limited spectral projection of the initial particle fluctuation
/// sqrt(N) (mu_0^N - rho_0) onto the grid: exact Fourier coefficients of the
/// empirical measure on the resolved dual modes (Nyquist mode zeroed), minus
/// rho_0's coefficients.
meanfield::DensityField initial_fluctuation(std::span<const double> positions,
                                            int N,
                                            const meanfield::DensityField& rho0,
                                            const meanfield::SpectralTransform& tr);

struct ConditionalMomentSeries {
  std::vector<double> times;
  std::vector<double> mean, mean_se;
  std::vector<double> var, var_se;
};

/// R solver runs sharing the common-noise path and density trajectory, with
/// independent white-noise draws and eta_0 = 0; returns per-time empirical
/// mean and variance of <eta_t, phi> with jackknife standard errors.
/// rho_path must hold the density at every step start (n_steps + 1 fields).
ConditionalMomentSeries conditional_moments(
    const FluctSolver& solver,
    const std::vector<meanfield::DensityField>& rho_path,
    const particles::CommonNoisePath& path, const scenario::TestFunction& phi,
    int R, const scenario::RngPlan& plan);

}  // namespace fluctlab::fluctuation
