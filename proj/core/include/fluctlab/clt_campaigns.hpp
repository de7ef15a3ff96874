#pragma once

#include "fluctlab/config.hpp"
#include "fluctlab/stats.hpp"

#include <string>
#include <vector>

namespace fluctlab::statlab {

/// Final-time martingale statistics over cfg.R replicas at the largest
/// configured N, each replica drawing its own common-noise path (shared
/// between that replica's particle run and its coupled density solution).
/// M is the idiosyncratic-noise martingale, Mhat the common-noise one, Q the
/// empirical quadratic-variation accumulator, and `predictor` the
/// replica-averaged model covariance sum_l int <(s^T grad a)_l (s^T grad b)_l,
/// rho> dt over test-function pairs.
struct MartingaleCampaignResult {
  int N = 0;
  int R = 0;
  double T = 0.0;
  std::vector<std::string> phi_names;
  std::vector<std::vector<double>> M;     // [phi][replica]
  std::vector<std::vector<double>> Mhat;  // [phi][replica]
  std::vector<std::vector<double>> Mmid;  // Mhat at the midpoint step
  std::vector<std::vector<double>> Q;     // [phi][replica]
  std::vector<double> predictor;          // [phi x phi] row-major

  int n_phi() const { return static_cast<int>(phi_names.size()); }
  double predictor_at(int a, int b) const {
    return predictor[static_cast<std::size_t>(a) * n_phi() + b];
  }
};

MartingaleCampaignResult martingale_campaign(const scenario::ScenarioConfig& cfg,
                                             int threads);

/// Sample covariance of (M(phi_a), M(phi_b)) against the model predictor.
/// pass: |empirical - predicted| <= max(4 jackknife SE, 10% of |predicted|).
struct CovarianceCheck {
  int a = 0, b = 0;
  std::string name_a, name_b;
  double empirical = 0.0;
  double se = 0.0;
  double predicted = 0.0;
  bool pass = false;
};
std::vector<CovarianceCheck> covariance_checks(
    const MartingaleCampaignResult& res);

/// Orthogonality of the two noise martingales: means of M_T * Mhat_T and of
/// M_T * (Mhat_T - Mhat_{T/2}) must both sit within 4 SE of zero.
struct CrossTermCheck {
  std::string phi_name;
  double mean_product = 0.0;
  double se_product = 0.0;
  double mean_increment = 0.0;
  double se_increment = 0.0;
  bool pass = false;
};
std::vector<CrossTermCheck> cross_term_check(
    const MartingaleCampaignResult& res);

/// Conditional CLT experiment: one fixed common-noise path W; R coupled
/// particle runs at the largest N, and R fluctuation-SPDE runs driven by the
/// same W and density path, with initial data coupled to the particle draws.
struct CltPhiReport {
  std::string phi_name;
  std::vector<double> particle;  // sqrt(N)(<phi, mu_T> - <phi, rho_T>)
  std::vector<double> spde;      // <eta_T, phi>
  KsResult ks_particle;          // fitted-normal KS
  KsResult ks_spde;
  KsResult ks_two_sample;        // particle vs SPDE pairings
  double mean_particle = 0.0;
  double mean_particle_se = 0.0;
  double var_particle = 0.0;
  double var_particle_se = 0.0;
  double var_spde = 0.0;
  double var_spde_se = 0.0;
  double var_analytic = 0.0;    // Var_{rho_T}(phi), grid quadrature
  double var_quadrature = 0.0;  // closed-form density route (NaN if n/a)
};

struct CltReport {
  int N = 0;
  int R = 0;
  double T = 0.0;
  std::vector<CltPhiReport> phis;
};

/// Requires cfg.R >= 500 (KS claims are meaningless below that).
CltReport conditional_clt(const scenario::ScenarioConfig& cfg, int threads);

}  // namespace fluctlab::statlab
