#pragma once

#include "fluctlab/coefficients.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/fft.hpp"
#include "fluctlab/grid.hpp"
#include "fluctlab/kernels.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluctlab::meanfield {

/// Raised when a step produces a field violating the positivity heuristic
/// (|min| > 0.1 * max), signaling the explicit terms outran the step size.
struct StabilityError : std::runtime_error {
  double suggested_dt;
  StabilityError(const std::string& msg, double dt)
      : std::runtime_error(msg), suggested_dt(dt) {}
};

struct StepDiagnostics {
  double mass_drift = 0.0;    // |mass - 1| before any renormalization
  bool renormalized = false;  // only when drift exceeded 1e-10
};

/// Spectral stepper for the density SPDE
///   d rho = div((k*rho) rho) dt - div(nu rho dW)
///           + 1/2 sum_ij d_i d_j ((sigma sigma^T + nu nu^T)_ij rho) dt.
///
/// Constant coefficient parts advance by the exact per-step factor
///   exp(-i xi . (nu_bar dW) - 1/2 xi^T sigma_bar sigma_bar^T xi dt),
/// whose phase realizes the common-noise translation exactly (its Ito
/// correction included in law). Interaction and variable-coefficient
/// remainders are explicit, with products formed in physical space under the
/// 2/3 dealiasing rule. For constant coefficients and k = 0 the scheme is
/// exact in law on the grid.
class FpSolver {
 public:
  FpSolver(const Grid& grid, const scenario::KernelSpec& kernel,
           const scenario::CoefficientSpec& sigma,
           const scenario::CoefficientSpec& nu);

  const Grid& grid() const { return grid_; }
  const SpectralTransform& transform() const { return tr_; }

  /// Advance rho by dt using the common-noise increment dW (nu.m entries;
  /// ignored when nu is zero). Thread-safe for concurrent calls on distinct
  /// fields.
  StepDiagnostics step(DensityField& rho, double dt,
                       std::span<const double> dW) const;

  /// k * rho on the grid, one field per component (dealiased spectral
  /// multiplication; periodic convolution with min-image kernel samples).
  std::vector<std::vector<double>> convolve(const DensityField& rho) const;

  /// Per-step decay factor of the constant diffusion at FFT-layout mode
  /// index, exp(-1/2 xi^T sigma_bar sigma_bar^T xi dt) (diagnostic hook).
  double implicit_factor(long mode, double dt) const;

 private:
  std::vector<double> filtered_values(std::span<const cplx> spec) const;

  Grid grid_;
  SpectralTransform tr_;
  scenario::KernelSpec kernel_;
  scenario::CoefficientSpec sigma_, nu_;

  std::vector<double> xi0_, xi1_;   // per-mode frequency components
  std::vector<double> qf_sigma_;    // xi^T sigma_bar sigma_bar^T xi per mode
  std::vector<double> mask_;        // 2/3-rule keep mask (0/1)
  std::vector<std::vector<cplx>> khat_;  // kernel spectral multipliers
  double gram_sigma_[4] = {0, 0, 0, 0};  // sigma_bar sigma_bar^T
  double gram_nu_[4] = {0, 0, 0, 0};     // nu_bar nu_bar^T
  std::vector<double> sigma_phase_, nu_phase_;  // per-cell omega . x
  bool sigma_var_ = false, nu_var_ = false;
};

}  // namespace fluctlab::meanfield
