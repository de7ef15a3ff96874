#pragma once

#include "fluctlab/config.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/stats.hpp"

#include <span>
#include <string>
#include <vector>

namespace fluctlab::statlab {

enum class NormKind { Plain, Interaction, Bilinear };

std::string to_string(NormKind kind);

/// One norm observation; maps 1:1 onto a row of the norms CSV.
struct NormSample {
  int N = 0;
  int replica = 0;
  double t = 0.0;
  double alpha = 0.0;
  double norm_sq = 0.0;         // squared norm; signed pairing for bilinear rows
  double residual_bound = 0.0;  // spectral tail bound (0 for bilinear rows)
  std::string source_tag;
};

/// Raw material of one coupled particle / mean-field sweep. For each N in
/// cfg.N_list and each replica, the particle system and the density SPDE are
/// advanced to t = T sharing the replica's common-noise path, and three
/// observables are recorded:
///   plain_sq   ||mu^N_T - rho_T||^2 in H^{-alpha} on the dual lattice,
///   inter_sq   ||div(k*mu mu) - div(k*rho rho)||^2 in H^{-alpha_interaction},
///   bilinear   <phi . k*(mu - rho), mu - rho> (signed).
/// Outer index N, inner index replica.
struct ConvergenceSweep {
  std::vector<int> N_list;
  double t_final = 0.0;
  double alpha_plain = 0.0;
  double alpha_interaction = 0.0;
  std::vector<std::vector<double>> plain_sq;
  std::vector<std::vector<double>> plain_residual;
  std::vector<std::vector<double>> inter_sq;
  std::vector<std::vector<double>> inter_residual;
  std::vector<std::vector<double>> bilinear;
};

/// Runs the sweep (cfg.R replicas per N). Requires at least 3 distinct N.
ConvergenceSweep convergence_sweep(const scenario::ScenarioConfig& cfg,
                                   int threads);

/// All rows of the sweep in CSV order (kind-major, then N, then replica).
std::vector<NormSample> sweep_samples(const ConvergenceSweep& sweep);

/// Moment scaling extracted from a sweep: per-N estimates of E[norm^p]
/// (E[|pairing|^p] for the bilinear kind) and the log-log slope over N.
struct MomentCampaignResult {
  NormKind kind = NormKind::Plain;
  int p = 2;
  double alpha = 0.0;
  std::vector<int> N_list;
  std::vector<double> moment;
  std::vector<double> moment_se;
  std::vector<double> scaled;     // N * moment (upper-bound diagnostics)
  double scaled_trend_rho = 0.0;  // Spearman of scaled vs N
  SlopeFit fit;
};

MomentCampaignResult moment_from_sweep(const ConvergenceSweep& sweep,
                                       NormKind kind, int p);

/// Convenience wrapper: runs a fresh sweep and reduces it.
MomentCampaignResult moment_campaign(const scenario::ScenarioConfig& cfg,
                                     NormKind kind, int p, int threads);

// ---------------------------------------------------------------------------
// Exponential law of large numbers
// ---------------------------------------------------------------------------

/// Per-N estimates of log E exp(kappa N |<phi, mu_N x mu_N>|^p) for the
/// centered product function phi(x,y) = (g(x) - <g, rho>)(g(y) - <g, rho>)
/// built from a bump g scaled to a target sup norm. Positions are i.i.d.
/// draws from the configured static density.
struct ElLnResult {
  int p = 2;
  double kappa = 1.0;
  double phi_sup = 0.0;   // realized sup |phi|
  double alpha0 = 0.0;    // smallness constant entering the bound
  double beta0 = 0.0;
  double bound = 0.0;     // closed-form bound (p = 2); NaN when unavailable
  std::vector<int> N_list;
  std::vector<double> estimate;
  std::vector<double> estimate_se;  // jackknife over 100 sample batches
  std::vector<bool> heavy_tail;
  double trend_rho = 0.0;  // Spearman of estimate vs N
  bool below_bound = true; // p = 2: every estimate <= bound
  bool flat = true;        // no increasing trend (trend_rho <= 0.3)
};

/// Default kappa when cfg.elln.kappa == 0:
///   kappa = (8 sqrt(e^9) ||(1+|.|^2)^{-alpha}||_{L^1}^2)^{-1}
/// specialized to cfg.alpha. Refuses to run (std::invalid_argument) when the
/// smallness condition fails: e^9 kappa sup^2 < 1 and 4e kappa sup^2 < 1 for
/// p = 2; e^14 kappa sup^4 < 1 for p = 4.
std::vector<ElLnResult> elln_campaign(const scenario::ScenarioConfig& cfg,
                                      int threads);

/// ||(1+|x|^2)^{-alpha}||_{L^1(R^d)} (closed forms, d = 1 or 2).
double bessel_l1_norm(int d, double alpha);

// ---------------------------------------------------------------------------
// Fluctuation increments
// ---------------------------------------------------------------------------

/// E ||eta^N_T - eta^N_{T-lag}||^4 in H^{-alpha_interaction} per lag, with the
/// log-log slope over the lag. Lags come from cfg.increments.lag_fractions and
/// must be whole numbers of steps; at least 3 lags required. Uses the largest
/// N in cfg.N_list with cfg.R replicas.
struct IncrementResult {
  int N = 0;
  double alpha = 0.0;
  std::vector<double> lags;
  std::vector<double> fourth_moment;
  std::vector<double> fourth_moment_se;
  SlopeFit fit;
  std::vector<NormSample> samples;  // t = lag, norm_sq = ||increment||^2
};

IncrementResult increment_campaign(const scenario::ScenarioConfig& cfg,
                                   int threads);

// ---------------------------------------------------------------------------
// Marginal relative entropy (one-particle proxy diagnostic)
// ---------------------------------------------------------------------------

struct MarginalKlResult {
  int N = 0;
  long pooled = 0;
  int bins = 0;
  double kl = 0.0;
  bool smoothed = false;
};

/// KL(empirical axis-0 marginal || field marginal) from a Freedman-Diaconis
/// histogram of pooled positions. Pooled count must be >= 10^4.
MarginalKlResult marginal_kl(std::span<const double> positions, long n_pooled,
                             int d, const meanfield::DensityField& rho);

/// Pools cfg.R replica endpoints per N (one shared common-noise path so all
/// replicas target the same rho_T) and reports the marginal KL per N.
std::vector<MarginalKlResult> entropy_campaign(
    const scenario::ScenarioConfig& cfg, int threads);

}  // namespace fluctlab::statlab
