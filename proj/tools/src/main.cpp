// fluctlab command-line driver.
//
// Subcommands (all write into --out and leave a manifest.json there):
//   simulate    one particle trajectory, positions + test-function pairings
//   meanfield   one density SPDE solve, final field + mass ledger
//   spde        fluctuation SPDE ensemble under one common-noise path
//   converge    particle-vs-field norm sweep over N with slope verdicts
//   elln        exponential-moment boundedness campaign
//   clt         conditional CLT experiment (particle vs SPDE pairings)
//   increments  fluctuation increment fourth-moment slope
//   crossterms  martingale covariance and orthogonality checks
//   entropy     marginal KL proxy diagnostic per N
//   report      render report.md (+ figure data) from a finished run dir
//
// Exit codes: 0 success and all verdicts pass; 1 verdict failure;
// 2 usage/config error; 3 numerical abort.

#include <CLI11.hpp>
#include <json.hpp>

#include "fluctlab/campaigns.hpp"
#include "fluctlab/clt_campaigns.hpp"
#include "fluctlab/common_noise.hpp"
#include "fluctlab/config.hpp"
#include "fluctlab/density_field.hpp"
#include "fluctlab/dynamics.hpp"
#include "fluctlab/fluct_solver.hpp"
#include "fluctlab/fp_solver.hpp"
#include "fluctlab/io.hpp"
#include "fluctlab/manifest.hpp"
#include "fluctlab/parallel.hpp"
#include "fluctlab/report.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <iostream>
#include <span>
#include <string>
#include <vector>

namespace {

using fluctlab::cli::PairingRow;
using fluctlab::cli::RunManifest;
using ordered_json = nlohmann::ordered_json;
namespace cli = fluctlab::cli;
namespace scenario = fluctlab::scenario;
namespace particles = fluctlab::particles;
namespace meanfield = fluctlab::meanfield;
namespace fluctuation = fluctlab::fluctuation;
namespace statlab = fluctlab::statlab;

struct CommonOpts {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int runs = 0;
  int threads = 0;
  int stride = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* runs_opt = nullptr;
  CLI::Option* stride_opt = nullptr;
};

void attach_common(CLI::App* sub, CommonOpts& o, bool wants_config) {
  if (wants_config)
    sub->add_option("--config", o.config, "scenario config file")
        ->required();
  sub->add_option("--out", o.out, "output directory")->required();
  o.seed_opt = sub->add_option("--seed", o.seed, "override the master seed");
  o.runs_opt =
      sub->add_option("--runs", o.runs, "override the replica count R");
  sub->add_option("--threads", o.threads,
                  "worker threads (0 = FLUCTLAB_THREADS or hardware)");
  o.stride_opt =
      sub->add_option("--stride", o.stride, "override the snapshot stride");
}

scenario::ScenarioConfig load_scenario(const CommonOpts& o) {
  scenario::ScenarioConfig cfg = scenario::load_config(o.config);
  if (o.seed_opt && o.seed_opt->count() > 0) cfg.seed = o.seed;
  if (o.runs_opt && o.runs_opt->count() > 0) cfg.R = o.runs;
  if (o.stride_opt && o.stride_opt->count() > 0)
    cfg.snapshot_stride = o.stride;
  cfg.validate();
  return cfg;
}

/// Collects artifacts, verdicts, tables and figures of one run directory and
/// finishes with summary.json + manifest.json. Exit code: 0 when every
/// verdict passed (or none were emitted), 1 otherwise.
class RunContext {
 public:
  RunContext(std::string dir, std::string command, std::string config_json)
      : dir_(std::move(dir)) {
    cli::ensure_dir(dir_);
    manifest_.command = std::move(command);
    manifest_.config_json = std::move(config_json);
    manifest_.version = cli::code_version();
    manifest_.started = cli::iso8601_now();
    verdicts_ = ordered_json::array();
    tables_ = ordered_json::array();
    figures_ = ordered_json::array();
  }

  const std::string& dir() const { return dir_; }

  void write_artifact(const std::string& name, const std::string& text) {
    cli::write_text(dir_ + "/" + name, text);
    cli::add_artifact(manifest_, dir_, name);
  }

  void write_binary(const std::string& name, std::span<const double> data,
                    std::span<const long> shape) {
    cli::write_binary_f64(dir_ + "/" + name, data, shape);
    cli::add_artifact(manifest_, dir_, name);
  }

  void add_verdict(const std::string& criterion, double value, double lo,
                   double hi, bool pass) {
    verdicts_.push_back({{"criterion", criterion},
                         {"value", value},
                         {"band", {lo, hi}},
                         {"pass", pass}});
    all_pass_ = all_pass_ && pass;
  }

  void add_table(const std::string& title, ordered_json columns,
                 ordered_json rows) {
    tables_.push_back({{"title", title},
                       {"columns", std::move(columns)},
                       {"rows", std::move(rows)}});
  }

  void add_figure(const std::string& name, ordered_json columns,
                  ordered_json rows) {
    figures_.push_back({{"name", name},
                        {"columns", std::move(columns)},
                        {"rows", std::move(rows)}});
  }

  int finish() {
    ordered_json summary;
    summary["command"] = manifest_.command;
    summary["verdicts"] = verdicts_;
    summary["tables"] = tables_;
    summary["figures"] = figures_;
    write_artifact("summary.json", summary.dump(2) + "\n");
    manifest_.finished = cli::iso8601_now();
    cli::write_manifest(manifest_, dir_);
    for (const auto& v : verdicts_) {
      std::cout << (v["pass"].get<bool>() ? "pass" : "FAIL") << "  "
                << v["criterion"].get<std::string>()
                << "  value=" << cli::format_double(v["value"].get<double>())
                << "  band=[" << cli::format_double(v["band"][0].get<double>())
                << ", " << cli::format_double(v["band"][1].get<double>())
                << "]\n";
    }
    std::cout << (all_pass_ ? "OK  " : "VERDICT FAILURE  ") << dir_ << "\n";
    return all_pass_ ? 0 : 1;
  }

 private:
  std::string dir_;
  RunManifest manifest_;
  ordered_json verdicts_, tables_, figures_;
  bool all_pass_ = true;
};

std::string join_argv(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

particles::CommonNoisePath draw_path(const scenario::ScenarioConfig& cfg,
                                     const scenario::RngPlan& plan,
                                     int replica) {
  const double dt = cfg.T / cfg.n_steps;
  if (cfg.nu.is_zero())
    return particles::CommonNoisePath::zero(cfg.n_steps, std::max(1, cfg.nu.m),
                                            dt);
  return particles::CommonNoisePath::draw(cfg.n_steps, cfg.nu.m, dt,
                                          plan.common_noise_seed(replica));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int run_simulate(const scenario::ScenarioConfig& cfg, RunContext& ctx) {
  const int N = cfg.N_list.back();
  const auto plan = cfg.rng_plan();
  const auto path = draw_path(cfg, plan, 0);
  const auto traj = particles::run_trajectory(cfg, N, 0, path);

  const std::vector<long> shape = {static_cast<long>(N),
                                   static_cast<long>(cfg.d)};
  ctx.write_binary("positions.bin", traj.final_state.X, shape);

  const auto phis = cfg.test_functions();
  std::vector<PairingRow> rows;
  for (std::size_t si = 0; si < traj.times.size(); ++si) {
    const auto& X = traj.snapshots[si];
    for (const auto& phi : phis) {
      double sum = 0.0;
      for (int i = 0; i < N; ++i)
        sum += phi.value(std::span<const double>(
            X.data() + static_cast<std::size_t>(i) * cfg.d,
            static_cast<std::size_t>(cfg.d)));
      rows.push_back({traj.times[si], 0, phi.name, sum / N});
    }
  }
  ctx.write_artifact("pairings.csv", cli::pairings_csv(rows));

  ordered_json table_rows = ordered_json::array();
  for (const auto& phi : phis) {
    double final_pairing = 0.0;
    for (const auto& r : rows)
      if (r.phi_name == phi.name && r.t == traj.times.back())
        final_pairing = r.value;
    table_rows.push_back({phi.name, final_pairing});
  }
  ctx.add_table("final empirical pairings <phi, mu_T>",
                {"phi", "pairing"}, table_rows);
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// meanfield
// ---------------------------------------------------------------------------

int run_meanfield(const scenario::ScenarioConfig& cfg, RunContext& ctx) {
  const meanfield::Grid grid(cfg.d, cfg.M, cfg.L);
  const meanfield::FpSolver solver(grid, cfg.kernel, cfg.sigma, cfg.nu);
  meanfield::DensityField rho(grid, cfg.rho0.grid_values(grid),
                              solver.transform());
  const auto plan = cfg.rng_plan();
  const auto path = draw_path(cfg, plan, 0);
  const double dt = cfg.T / cfg.n_steps;

  std::string mass_csv = "step,t,mass,mass_drift,renormalized\n";
  double max_drift = 0.0;
  for (int s = 0; s < cfg.n_steps; ++s) {
    const auto diag = solver.step(rho, dt, path.increment(s));
    max_drift = std::max(max_drift, diag.mass_drift);
    mass_csv += std::to_string(s + 1) + "," +
                cli::format_double((s + 1) * dt) + "," +
                cli::format_double(rho.mass()) + "," +
                cli::format_double(diag.mass_drift) + "," +
                (diag.renormalized ? "1" : "0") + "\n";
  }
  ctx.write_artifact("mass.csv", mass_csv);

  std::vector<long> shape;
  if (cfg.d == 1)
    shape = {static_cast<long>(cfg.M)};
  else
    shape = {static_cast<long>(cfg.M), static_cast<long>(cfg.M)};
  ctx.write_binary("density.bin", rho.values, shape);

  ctx.add_table("density solve",
                {"T", "final mass", "max mass drift"},
                ordered_json::array(
                    {{cfg.T, rho.mass(), max_drift}}));
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// spde
// ---------------------------------------------------------------------------

int run_spde(const scenario::ScenarioConfig& cfg, RunContext& ctx,
             int threads) {
  auto plan = cfg.rng_plan();
  plan.shared_common_noise = true;
  const meanfield::Grid grid(cfg.d, cfg.M, cfg.L);
  const meanfield::FpSolver fp(grid, cfg.kernel, cfg.sigma, cfg.nu);
  const fluctuation::FluctSolver fl(grid, cfg.kernel, cfg.sigma, cfg.nu);
  const double dt = cfg.T / cfg.n_steps;
  const auto path = draw_path(cfg, plan, 0);

  // Density trajectory shared by every replica (held at each step start).
  std::vector<meanfield::DensityField> rho_path;
  rho_path.reserve(cfg.n_steps + 1);
  {
    meanfield::DensityField rho(grid, cfg.rho0.grid_values(grid),
                                fp.transform());
    rho_path.push_back(rho);
    for (int s = 0; s < cfg.n_steps; ++s) {
      fp.step(rho, dt, path.increment(s));
      rho_path.push_back(rho);
    }
  }

  const auto phis = cfg.test_functions();
  std::vector<meanfield::TabulatedPhi> tphis;
  for (const auto& phi : phis) tphis.push_back(meanfield::tabulate(grid, phi));

  std::vector<int> capture_steps;
  capture_steps.push_back(0);
  for (int s = 1; s <= cfg.n_steps; ++s)
    if (s == cfg.n_steps || s % cfg.snapshot_stride == 0)
      capture_steps.push_back(s);

  const int R = cfg.R;
  std::vector<std::vector<PairingRow>> per_run(R);
  statlab::parallel_for(R, threads, [&](int r) {
    meanfield::DensityField eta(
        grid, std::vector<double>(grid.size(), 0.0), fl.transform());
    scenario::GaussianStream white(plan.white_noise_seed(r));
    auto& rows = per_run[r];
    std::size_t next_capture = 0;
    auto capture = [&](int step) {
      for (std::size_t p = 0; p < tphis.size(); ++p)
        rows.push_back({step * dt, r, tphis[p].name,
                        meanfield::pair_values(eta, tphis[p].phi)});
    };
    if (capture_steps[next_capture] == 0) {
      capture(0);
      ++next_capture;
    }
    for (int s = 0; s < cfg.n_steps; ++s) {
      const auto wn = fluctuation::WhiteNoiseSample::draw(
          grid, fl.noise_components(), dt, white);
      fl.step(eta, rho_path[s], dt, path.increment(s), &wn);
      if (next_capture < capture_steps.size() &&
          capture_steps[next_capture] == s + 1) {
        capture(s + 1);
        ++next_capture;
      }
    }
  });

  std::vector<PairingRow> rows;
  for (const auto& rr : per_run) rows.insert(rows.end(), rr.begin(), rr.end());
  ctx.write_artifact("pairings.csv", cli::pairings_csv(rows));

  if (R >= 2) {
    ordered_json table_rows = ordered_json::array();
    for (const auto& tphi : tphis) {
      std::vector<double> finals;
      for (const auto& r : rows)
        if (r.phi_name == tphi.name &&
            r.t == cfg.n_steps * dt)
          finals.push_back(r.value);
      table_rows.push_back({tphi.name, statlab::sample_mean(finals),
                            statlab::mean_se(finals),
                            statlab::sample_variance(finals)});
    }
    ctx.add_table("final-time <eta_T, phi> over replicas",
                  {"phi", "mean", "mean se", "variance"}, table_rows);
  }
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

void moment_outputs(RunContext& ctx, const statlab::MomentCampaignResult& m,
                    const std::string& label) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.N_list.size(); ++i)
    rows.push_back(
        {m.N_list[i], m.moment[i], m.moment_se[i], m.scaled[i]});
  const std::string title = label + " (p=" + std::to_string(m.p) +
                            ", alpha=" + cli::format_double(m.alpha) + ")";
  ctx.add_table(title, {"N", "moment", "se", "N*moment"}, rows);
  ctx.add_figure(statlab::to_string(m.kind) + "_p" + std::to_string(m.p),
                 {"N", "moment", "se"}, rows);
}

int run_converge(const scenario::ScenarioConfig& cfg, RunContext& ctx,
                 int threads) {
  const auto sweep = statlab::convergence_sweep(cfg, threads);
  ctx.write_artifact("norms.csv",
                     cli::norms_csv(statlab::sweep_samples(sweep)));

  const auto plain2 =
      statlab::moment_from_sweep(sweep, statlab::NormKind::Plain, 2);
  const auto plain4 =
      statlab::moment_from_sweep(sweep, statlab::NormKind::Plain, 4);
  const auto inter2 =
      statlab::moment_from_sweep(sweep, statlab::NormKind::Interaction, 2);
  const auto inter4 =
      statlab::moment_from_sweep(sweep, statlab::NormKind::Interaction, 4);

  moment_outputs(ctx, plain2, "particle-field norm");
  moment_outputs(ctx, plain4, "particle-field norm");
  moment_outputs(ctx, inter2, "interaction difference norm");
  moment_outputs(ctx, inter4, "interaction difference norm");

  ctx.add_verdict("plain_p2_slope", plain2.fit.slope, -1.15, -0.85,
                  plain2.fit.slope >= -1.15 && plain2.fit.slope <= -0.85);
  ctx.add_verdict("plain_p4_scaled_trend", plain4.scaled_trend_rho, -1.0, 0.3,
                  plain4.scaled_trend_rho <= 0.3);
  ctx.add_verdict("interaction_p4_scaled_trend", inter4.scaled_trend_rho,
                  -1.0, 0.3, inter4.scaled_trend_rho <= 0.3);

  if (!cfg.kernel.is_zero()) {
    const auto bil1 =
        statlab::moment_from_sweep(sweep, statlab::NormKind::Bilinear, 1);
    moment_outputs(ctx, bil1, "bilinear interaction pairing");
    ctx.add_verdict("bilinear_p1_slope", bil1.fit.slope, -1.2, -0.8,
                    bil1.fit.slope >= -1.2 && bil1.fit.slope <= -0.8);
  }
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// elln
// ---------------------------------------------------------------------------

int run_elln(const scenario::ScenarioConfig& cfg, RunContext& ctx,
             int threads) {
  const auto results = statlab::elln_campaign(cfg, threads);

  double bound_p2 = std::nan("");
  for (const auto& r : results)
    if (r.p == 2) bound_p2 = r.bound;

  std::string csv = "p,N,estimate,estimate_se,heavy_tail,bound\n";
  for (const auto& r : results)
    for (std::size_t i = 0; i < r.N_list.size(); ++i)
      csv += std::to_string(r.p) + "," + std::to_string(r.N_list[i]) + "," +
             cli::format_double(r.estimate[i]) + "," +
             cli::format_double(r.estimate_se[i]) + "," +
             (r.heavy_tail[i] ? "1" : "0") + "," +
             cli::format_double(r.bound) + "\n";
  ctx.write_artifact("elln.csv", csv);

  for (const auto& r : results) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < r.N_list.size(); ++i)
      rows.push_back({r.N_list[i], r.estimate[i], r.estimate_se[i],
                      r.heavy_tail[i]});
    ctx.add_table("exponential moment, p=" + std::to_string(r.p) +
                      " (kappa=" + cli::format_double(r.kappa) +
                      ", sup|phi|=" + cli::format_double(r.phi_sup) + ")",
                  {"N", "log E exp", "se", "heavy tail"}, rows);
    ctx.add_figure("elln_p" + std::to_string(r.p),
                   {"N", "estimate", "se"}, rows);

    double max_est = -std::numeric_limits<double>::infinity();
    for (double e : r.estimate) max_est = std::max(max_est, e);
    if (std::isfinite(bound_p2)) {
      const bool below = max_est <= bound_p2;
      ctx.add_verdict("elln_p" + std::to_string(r.p) + "_below_bound",
                      max_est, 0.0, bound_p2, below);
    }
    if (r.p == 4)
      ctx.add_verdict("elln_p4_flat", r.trend_rho, -1.0, 0.3, r.flat);
  }
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// clt
// ---------------------------------------------------------------------------

int run_clt(const scenario::ScenarioConfig& cfg, RunContext& ctx,
            int threads) {
  const auto report = statlab::conditional_clt(cfg, threads);

  std::vector<PairingRow> particle_rows, spde_rows;
  for (const auto& phi : report.phis)
    for (std::size_t r = 0; r < phi.particle.size(); ++r) {
      particle_rows.push_back(
          {report.T, static_cast<int>(r), phi.phi_name, phi.particle[r]});
      spde_rows.push_back(
          {report.T, static_cast<int>(r), phi.phi_name, phi.spde[r]});
    }
  ctx.write_artifact("particle_pairings.csv",
                     cli::pairings_csv(particle_rows));
  ctx.write_artifact("spde_pairings.csv", cli::pairings_csv(spde_rows));

  ordered_json rows = ordered_json::array();
  for (const auto& phi : report.phis) {
    rows.push_back({phi.phi_name, phi.mean_particle, phi.mean_particle_se,
                    phi.var_particle, phi.var_particle_se, phi.var_spde,
                    phi.var_spde_se, phi.var_analytic, phi.var_quadrature});
    ctx.add_verdict("ks_particle_" + phi.phi_name, phi.ks_particle.p_value,
                    0.01, 1.0, phi.ks_particle.p_value > 0.01);
    ctx.add_verdict("ks_spde_" + phi.phi_name, phi.ks_spde.p_value, 0.01, 1.0,
                    phi.ks_spde.p_value > 0.01);
    ctx.add_verdict("ks_two_sample_" + phi.phi_name,
                    phi.ks_two_sample.p_value, 0.01, 1.0,
                    phi.ks_two_sample.p_value > 0.01);
    const double ratio_particle = phi.var_particle / phi.var_analytic;
    const double ratio_spde = phi.var_spde / phi.var_analytic;
    ctx.add_verdict("var_ratio_particle_" + phi.phi_name, ratio_particle,
                    0.85, 1.15,
                    ratio_particle >= 0.85 && ratio_particle <= 1.15);
    ctx.add_verdict("var_ratio_spde_" + phi.phi_name, ratio_spde, 0.85, 1.15,
                    ratio_spde >= 0.85 && ratio_spde <= 1.15);
  }
  ctx.add_table("conditional fluctuation pairings at T",
                {"phi", "mean", "mean se", "var particle", "var se",
                 "var spde", "var se", "var analytic", "var quadrature"},
                rows);
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// increments
// ---------------------------------------------------------------------------

int run_increments(const scenario::ScenarioConfig& cfg, RunContext& ctx,
                   int threads) {
  const auto res = statlab::increment_campaign(cfg, threads);
  ctx.write_artifact("increments.csv", cli::norms_csv(res.samples));

  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < res.lags.size(); ++i)
    rows.push_back({res.lags[i], res.fourth_moment[i],
                    res.fourth_moment_se[i]});
  ctx.add_table("fluctuation increment fourth moments (N=" +
                    std::to_string(res.N) +
                    ", alpha=" + cli::format_double(res.alpha) + ")",
                {"lag", "E||increment||^4", "se"}, rows);
  ctx.add_figure("increments", {"lag", "fourth_moment", "se"}, rows);

  ctx.add_verdict("increment_p4_slope", res.fit.slope, 1.6, 2.4,
                  res.fit.slope >= 1.6 && res.fit.slope <= 2.4);
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// crossterms
// ---------------------------------------------------------------------------

int run_crossterms(const scenario::ScenarioConfig& cfg, RunContext& ctx,
                   int threads) {
  const auto res = statlab::martingale_campaign(cfg, threads);

  std::string csv = "replica,phi_name,M,Mhat,Mhat_mid,Q\n";
  for (int p = 0; p < res.n_phi(); ++p)
    for (int r = 0; r < res.R; ++r)
      csv += std::to_string(r) + "," + res.phi_names[p] + "," +
             cli::format_double(res.M[p][r]) + "," +
             cli::format_double(res.Mhat[p][r]) + "," +
             cli::format_double(res.Mmid[p][r]) + "," +
             cli::format_double(res.Q[p][r]) + "\n";
  ctx.write_artifact("martingales.csv", csv);

  const auto covs = statlab::covariance_checks(res);
  ordered_json cov_rows = ordered_json::array();
  for (const auto& c : covs) {
    cov_rows.push_back({c.name_a, c.name_b, c.empirical, c.se, c.predicted});
    const double tol = std::max(4.0 * c.se, 0.10 * std::abs(c.predicted));
    ctx.add_verdict("cov_" + c.name_a + "_" + c.name_b, c.empirical,
                    c.predicted - tol, c.predicted + tol, c.pass);
  }
  ctx.add_table("martingale covariance vs model predictor",
                {"phi a", "phi b", "empirical", "jackknife se", "predicted"},
                cov_rows);

  const auto crosses = statlab::cross_term_check(res);
  ordered_json cross_rows = ordered_json::array();
  for (const auto& c : crosses) {
    cross_rows.push_back({c.phi_name, c.mean_product, c.se_product,
                          c.mean_increment, c.se_increment});
    ctx.add_verdict("cross_product_" + c.phi_name, c.mean_product,
                    -4.0 * c.se_product, 4.0 * c.se_product,
                    std::abs(c.mean_product) <= 4.0 * c.se_product);
    ctx.add_verdict("cross_increment_" + c.phi_name, c.mean_increment,
                    -4.0 * c.se_increment, 4.0 * c.se_increment,
                    std::abs(c.mean_increment) <= 4.0 * c.se_increment);
  }
  ctx.add_table("noise-martingale orthogonality",
                {"phi", "mean M*Mhat", "se", "mean M*dMhat", "se"},
                cross_rows);
  return ctx.finish();
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

int run_entropy(const scenario::ScenarioConfig& cfg, RunContext& ctx,
                int threads) {
  const auto results = statlab::entropy_campaign(cfg, threads);

  std::string csv = "N,pooled,bins,kl,smoothed\n";
  ordered_json rows = ordered_json::array();
  std::vector<double> Ns, kls;
  for (const auto& r : results) {
    csv += std::to_string(r.N) + "," + std::to_string(r.pooled) + "," +
           std::to_string(r.bins) + "," + cli::format_double(r.kl) + "," +
           (r.smoothed ? "1" : "0") + "\n";
    rows.push_back({r.N, r.pooled, r.bins, r.kl, r.smoothed});
    Ns.push_back(static_cast<double>(r.N));
    kls.push_back(r.kl);
  }
  ctx.write_artifact("entropy.csv", csv);
  ctx.add_table(
      "marginal KL proxy (one-particle diagnostic, not the full "
      "N-particle relative entropy)",
      {"N", "pooled", "bins", "KL", "smoothed"}, rows);
  ctx.add_figure("entropy", {"N", "kl"}, [&] {
    ordered_json fig = ordered_json::array();
    for (std::size_t i = 0; i < Ns.size(); ++i)
      fig.push_back({Ns[i], kls[i]});
    return fig;
  }());

  const double trend = statlab::spearman_rho(Ns, kls);
  ctx.add_verdict("marginal_kl_trend", trend, -1.0, 0.3, trend <= 0.3);
  return ctx.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "fluctlab: mean-field particle systems, their stochastic Fokker-Planck "
      "limit, and fluctuation statistics"};
  app.require_subcommand(1);

  CommonOpts sim_o, mf_o, spde_o, conv_o, elln_o, clt_o, inc_o, cross_o,
      ent_o, rep_o;

  auto* sub_sim = app.add_subcommand(
      "simulate", "run one interacting-particle trajectory");
  attach_common(sub_sim, sim_o, true);
  auto* sub_mf = app.add_subcommand(
      "meanfield", "solve the density SPDE under one common-noise path");
  attach_common(sub_mf, mf_o, true);
  auto* sub_spde = app.add_subcommand(
      "spde", "run a fluctuation-SPDE ensemble under one common-noise path");
  attach_common(sub_spde, spde_o, true);
  auto* sub_conv = app.add_subcommand(
      "converge", "particle-vs-field norm scaling sweep over N");
  attach_common(sub_conv, conv_o, true);
  auto* sub_elln = app.add_subcommand(
      "elln", "exponential moment boundedness campaign");
  attach_common(sub_elln, elln_o, true);
  auto* sub_clt = app.add_subcommand(
      "clt", "conditional central-limit experiment (fixed common noise)");
  attach_common(sub_clt, clt_o, true);
  auto* sub_inc = app.add_subcommand(
      "increments", "fluctuation increment fourth-moment scaling");
  attach_common(sub_inc, inc_o, true);
  auto* sub_cross = app.add_subcommand(
      "crossterms", "martingale covariance and orthogonality checks");
  attach_common(sub_cross, cross_o, true);
  auto* sub_ent = app.add_subcommand(
      "entropy", "marginal KL proxy diagnostic per N");
  attach_common(sub_ent, ent_o, true);
  auto* sub_rep = app.add_subcommand(
      "report", "render report.md from a finished run directory");
  attach_common(sub_rep, rep_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = join_argv(argc, argv);

  try {
    if (sub_rep->parsed()) {
      fluctlab::cli::emit_report(rep_o.out);
      std::cout << "OK  " << rep_o.out << "/report.md\n";
      return 0;
    }

    const CommonOpts& o = sub_sim->parsed()     ? sim_o
                          : sub_mf->parsed()    ? mf_o
                          : sub_spde->parsed()  ? spde_o
                          : sub_conv->parsed()  ? conv_o
                          : sub_elln->parsed()  ? elln_o
                          : sub_clt->parsed()   ? clt_o
                          : sub_inc->parsed()   ? inc_o
                          : sub_cross->parsed() ? cross_o
                                                : ent_o;
    const auto cfg = load_scenario(o);
    const int threads = statlab::resolve_threads(o.threads);
    RunContext ctx(o.out, command, cfg.manifest_json());

    if (sub_sim->parsed()) return run_simulate(cfg, ctx);
    if (sub_mf->parsed()) return run_meanfield(cfg, ctx);
    if (sub_spde->parsed()) return run_spde(cfg, ctx, threads);
    if (sub_conv->parsed()) return run_converge(cfg, ctx, threads);
    if (sub_elln->parsed()) return run_elln(cfg, ctx, threads);
    if (sub_clt->parsed()) return run_clt(cfg, ctx, threads);
    if (sub_inc->parsed()) return run_increments(cfg, ctx, threads);
    if (sub_cross->parsed()) return run_crossterms(cfg, ctx, threads);
    if (sub_ent->parsed()) return run_entropy(cfg, ctx, threads);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const scenario::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fluctlab::cli::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const meanfield::StabilityError& e) {
    std::cerr << "numerical abort: " << e.what()
              << " (suggested dt " << e.suggested_dt << ")\n";
    return 3;
  } catch (const particles::SimulationError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
