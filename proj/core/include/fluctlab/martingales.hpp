#pragma once

#include "fluctlab/coefficients.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/dynamics.hpp"
#include "fluctlab/test_functions.hpp"

#include <span>
#include <string>
#include <vector>

namespace fluctlab::particles {

/// Discrete-time martingales attached to one trajectory, one entry per test
/// function. All start at zero; Q is nondecreasing.
struct MartingaleLedger {
  struct Series {
    std::string phi_name;
    std::vector<double> M;     // idiosyncratic-noise martingale
    std::vector<double> Mhat;  // common-noise martingale
    std::vector<double> Q;     // empirical quadratic-variation accumulator
  };
  std::vector<Series> series;
  std::vector<double> times;
  // Accumulated sum_l int <(sigma^T grad phi_a)_l (sigma^T grad phi_b)_l, rho> dt,
  // row-major over (a, b). This is the model covariance of (M(phi_a)) given the
  // density path.
  std::vector<double> cov_predictor;

  int n_phi() const { return static_cast<int>(series.size()); }
  double predictor(int a, int b) const { return cov_predictor[a * n_phi() + b]; }
};

/// Accumulates the martingale increments of one trajectory. Call accumulate()
/// once per step with the state at the START of the step plus that step's
/// noise increments.
class MartingaleAccumulator {
 public:
  MartingaleAccumulator(std::vector<scenario::TestFunction> phis,
                        const scenario::CoefficientSpec& sigma,
                        const scenario::CoefficientSpec& nu);

  /// before: ensemble at step start; rho_before: density at step start;
  /// dB: N*m idiosyncratic increments; dW: common increment (may be empty when
  /// the common coefficient is zero).
  void accumulate(const ParticleEnsemble& before,
                  const meanfield::DensityField& rho_before,
                  std::span<const double> dB, std::span<const double> dW,
                  double dt);

  const MartingaleLedger& ledger() const { return ledger_; }

 private:
  std::vector<scenario::TestFunction> phis_;
  scenario::CoefficientSpec sigma_;
  scenario::CoefficientSpec nu_;
  MartingaleLedger ledger_;
  // Tabulated gradients of each phi on the grid, built lazily for the first
  // density field seen (all share one grid).
  std::vector<std::vector<double>> grid_dphi_;  // [phi][q*size+cell]
  bool tabulated_ = false;
  void tabulate(const meanfield::Grid& grid);
};

}  // namespace fluctlab::particles
