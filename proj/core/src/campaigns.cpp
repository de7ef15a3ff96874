#include "fluctlab/campaigns.hpp"

#include "fluctlab/dynamics.hpp"
#include "fluctlab/fp_solver.hpp"
#include "fluctlab/lattice.hpp"
#include "fluctlab/norms.hpp"
#include "fluctlab/parallel.hpp"
#include "fluctlab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace fluctlab::statlab {

namespace {

using meanfield::DensityField;
using meanfield::FpSolver;
using meanfield::Grid;
using particles::CommonNoisePath;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Dual lattice used whenever a field enters a norm: commensurate nodes,
/// cutoff capped both by the resolved band (|n| <= M/2 - 1) and by the
/// configured frequency cutoff Xi.
sobolev::FrequencyLattice field_lattice(const scenario::ScenarioConfig& cfg,
                                        const Grid& grid) {
    int K = grid.M / 2 - 1;
    const int by_cutoff =
        static_cast<int>(std::floor(cfg.Xi / grid.dual_spacing()));
    K = std::min(K, std::max(1, by_cutoff));
    return sobolev::make_dual_lattice(cfg.d, cfg.L, K);
}

CommonNoisePath draw_path(const scenario::ScenarioConfig& cfg,
                          const scenario::RngPlan& plan, int replica,
                          double dt) {
    if (cfg.nu.is_zero())
        return CommonNoisePath::zero(cfg.n_steps, cfg.nu.m, dt);
    return CommonNoisePath::draw(cfg.n_steps, cfg.nu.m, dt,
                                 plan.common_noise_seed(replica));
}

/// First d registered test functions as the components of the vector-valued
/// bilinear pairing function.
std::vector<scenario::TestFunction> bilinear_phi(
    const scenario::ScenarioConfig& cfg) {
    if (cfg.phis.empty())
        throw std::invalid_argument(
            "convergence sweep: at least one test function must be configured");
    std::vector<scenario::TestFunction> phi;
    phi.reserve(static_cast<std::size_t>(cfg.d));
    for (int q = 0; q < cfg.d; ++q) {
        const auto& spec =
            cfg.phis[std::min<std::size_t>(q, cfg.phis.size() - 1)];
        phi.push_back(spec.materialize(cfg.d));
    }
    return phi;
}

int distinct_count(const std::vector<int>& xs) {
    std::set<int> s(xs.begin(), xs.end());
    return static_cast<int>(s.size());
}

std::vector<double> to_double(const std::vector<int>& xs) {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i];
    return out;
}

}  // namespace

std::string to_string(NormKind kind) {
    switch (kind) {
        case NormKind::Plain: return "plain";
        case NormKind::Interaction: return "interaction";
        case NormKind::Bilinear: return "bilinear";
    }
    return "?";
}

ConvergenceSweep convergence_sweep(const scenario::ScenarioConfig& cfg,
                                   int threads) {
    if (distinct_count(cfg.N_list) < 3)
        throw std::invalid_argument(
            "convergence sweep: need at least 3 distinct particle counts");

    const Grid grid(cfg.d, cfg.M, cfg.L);
    const FpSolver solver(grid, cfg.kernel, cfg.sigma, cfg.nu);
    const auto rho0_values = cfg.rho0.grid_values(grid);
    const auto lattice = field_lattice(cfg, grid);
    const auto plan = cfg.rng_plan();
    const double dt = cfg.T / cfg.n_steps;
    const auto phi = bilinear_phi(cfg);

    ConvergenceSweep out;
    out.N_list = cfg.N_list;
    out.t_final = cfg.T;
    out.alpha_plain = cfg.alpha;
    out.alpha_interaction = cfg.alpha_interaction;
    const int nN = static_cast<int>(cfg.N_list.size());
    const int R = cfg.R;
    for (auto* field : {&out.plain_sq, &out.plain_residual, &out.inter_sq,
                        &out.inter_residual, &out.bilinear}) {
        field->assign(static_cast<std::size_t>(nN),
                      std::vector<double>(static_cast<std::size_t>(R), 0.0));
    }

    parallel_for(nN * R, threads, [&](int job) {
        const int iN = job / R;
        const int r = job % R;
        const int N = cfg.N_list[iN];

        const auto path = draw_path(cfg, plan, r, dt);
        auto ens = particles::make_initial_ensemble(cfg, N, r, path);
        particles::IdioStreams idio(plan, r, N);
        DensityField rho(grid, rho0_values, solver.transform());
        for (int s = 0; s < cfg.n_steps; ++s) {
            particles::step_euler(ens, dt, cfg.sigma, cfg.nu, cfg.kernel, idio,
                                  path.increment(s));
            solver.step(rho, dt, path.increment(s));
        }

        const auto Fp = sobolev::empirical_fourier(ens.X, N, cfg.d, lattice);
        const auto Ff = sobolev::field_fourier(rho, lattice);
        const auto diff = sobolev::combine_spectra(Fp, 1.0, Ff, -1.0);
        const auto plain = sobolev::h_neg_alpha_norm(diff, cfg.alpha);
        out.plain_sq[iN][r] = plain.value_sq;
        out.plain_residual[iN][r] = plain.residual;

        if (!cfg.kernel.is_zero()) {
            const auto Ip = sobolev::interaction_spectrum(ens.X, N, cfg.d, cfg.L,
                                                          cfg.kernel, lattice);
            const auto If = sobolev::interaction_spectrum_field(
                rho, cfg.kernel, solver.transform(), lattice);
            const auto idiff = sobolev::combine_spectra(Ip, 1.0, If, -1.0);
            const auto inter =
                sobolev::h_neg_alpha_norm(idiff, cfg.alpha_interaction);
            out.inter_sq[iN][r] = inter.value_sq;
            out.inter_residual[iN][r] = inter.residual;
            out.bilinear[iN][r] = sobolev::pair_test_bilinear(
                ens.X, N, rho, phi, cfg.kernel, solver.transform());
        }
    });
    return out;
}

std::vector<NormSample> sweep_samples(const ConvergenceSweep& sweep) {
    std::vector<NormSample> rows;
    const auto emit = [&](const std::vector<std::vector<double>>& sq,
                          const std::vector<std::vector<double>>& res,
                          double alpha, const std::string& tag) {
        for (std::size_t iN = 0; iN < sweep.N_list.size(); ++iN)
            for (std::size_t r = 0; r < sq[iN].size(); ++r)
                rows.push_back({sweep.N_list[iN], static_cast<int>(r),
                                sweep.t_final, alpha, sq[iN][r],
                                res.empty() ? 0.0 : res[iN][r], tag});
    };
    emit(sweep.plain_sq, sweep.plain_residual, sweep.alpha_plain,
         "plain_difference");
    emit(sweep.inter_sq, sweep.inter_residual, sweep.alpha_interaction,
         "interaction_difference");
    emit(sweep.bilinear, {}, 0.0, "bilinear_pairing");
    return rows;
}

MomentCampaignResult moment_from_sweep(const ConvergenceSweep& sweep,
                                       NormKind kind, int p) {
    const std::vector<std::vector<double>>* src = nullptr;
    double alpha = 0.0;
    switch (kind) {
        case NormKind::Plain:
            src = &sweep.plain_sq;
            alpha = sweep.alpha_plain;
            if (p != 2 && p != 4)
                throw std::invalid_argument("moment_campaign: p must be 2 or 4");
            break;
        case NormKind::Interaction:
            src = &sweep.inter_sq;
            alpha = sweep.alpha_interaction;
            if (p != 2 && p != 4)
                throw std::invalid_argument("moment_campaign: p must be 2 or 4");
            break;
        case NormKind::Bilinear:
            src = &sweep.bilinear;
            if (p != 1 && p != 2)
                throw std::invalid_argument(
                    "moment_campaign: bilinear kind supports p = 1 or 2");
            break;
    }

    MomentCampaignResult out;
    out.kind = kind;
    out.p = p;
    out.alpha = alpha;
    out.N_list = sweep.N_list;
    std::vector<double> powered;
    for (std::size_t iN = 0; iN < src->size(); ++iN) {
        const auto& reps = (*src)[iN];
        powered.resize(reps.size());
        for (std::size_t r = 0; r < reps.size(); ++r) {
            if (kind == NormKind::Bilinear)
                powered[r] = p == 1 ? std::abs(reps[r]) : reps[r] * reps[r];
            else
                powered[r] = p == 2 ? reps[r] : reps[r] * reps[r];
        }
        out.moment.push_back(sample_mean(powered));
        out.moment_se.push_back(mean_se(powered));
        out.scaled.push_back(sweep.N_list[iN] * out.moment.back());
    }

    const auto Nd = to_double(out.N_list);
    out.scaled_trend_rho = spearman_rho(Nd, out.scaled);
    const bool fittable =
        std::all_of(out.moment.begin(), out.moment.end(),
                    [](double v) { return v > 0.0 && std::isfinite(v); });
    if (fittable) {
        out.fit = fit_loglog_slope(Nd, out.moment, out.moment_se);
    } else {
        out.fit.slope = kNaN;
        out.fit.ci_low = kNaN;
        out.fit.ci_high = kNaN;
    }
    return out;
}

MomentCampaignResult moment_campaign(const scenario::ScenarioConfig& cfg,
                                     NormKind kind, int p, int threads) {
    return moment_from_sweep(convergence_sweep(cfg, threads), kind, p);
}

// ---------------------------------------------------------------------------
// Exponential law of large numbers
// ---------------------------------------------------------------------------

double bessel_l1_norm(int d, double alpha) {
    if (d == 1) {
        if (alpha <= 0.5)
            throw std::invalid_argument("bessel_l1_norm: alpha must exceed 1/2");
        // int (1+x^2)^(-alpha) dx = sqrt(pi) Gamma(alpha-1/2) / Gamma(alpha)
        return std::sqrt(std::numbers::pi) *
               std::exp(std::lgamma(alpha - 0.5) - std::lgamma(alpha));
    }
    if (alpha <= 1.0)
        throw std::invalid_argument("bessel_l1_norm: alpha must exceed 1 in d=2");
    return std::numbers::pi / (alpha - 1.0);
}

namespace {

/// Jackknife SE of log-mean-exp over `batches` near-equal sample batches.
double log_mean_exp_batch_se(std::span<const double> exponents, int batches) {
    const long S = static_cast<long>(exponents.size());
    const int B = static_cast<int>(std::min<long>(batches, S));
    if (B < 2) return 0.0;
    double m = -std::numeric_limits<double>::infinity();
    for (double e : exponents) m = std::max(m, e);
    std::vector<double> batch_sum(static_cast<std::size_t>(B), 0.0);
    std::vector<long> batch_n(static_cast<std::size_t>(B), 0);
    double total = 0.0;
    for (long s = 0; s < S; ++s) {
        const int b = static_cast<int>(s % B);
        const double v = std::exp(exponents[static_cast<std::size_t>(s)] - m);
        batch_sum[static_cast<std::size_t>(b)] += v;
        batch_n[static_cast<std::size_t>(b)] += 1;
        total += v;
    }
    std::vector<double> theta(static_cast<std::size_t>(B));
    double theta_bar = 0.0;
    for (int b = 0; b < B; ++b) {
        const double rest = total - batch_sum[static_cast<std::size_t>(b)];
        const long n = S - batch_n[static_cast<std::size_t>(b)];
        theta[static_cast<std::size_t>(b)] =
            m + std::log(std::max(rest, 1e-300) / static_cast<double>(n));
        theta_bar += theta[static_cast<std::size_t>(b)];
    }
    theta_bar /= B;
    double ss = 0.0;
    for (double t : theta) ss += (t - theta_bar) * (t - theta_bar);
    return std::sqrt((B - 1.0) / B * ss);
}

}  // namespace

std::vector<ElLnResult> elln_campaign(const scenario::ScenarioConfig& cfg,
                                      int threads) {
    const auto& set = cfg.elln;
    if (set.N_list.empty())
        throw std::invalid_argument("elln_campaign: empty N list");
    if (set.samples < 100)
        throw std::invalid_argument("elln_campaign: need at least 100 samples");

    const Grid grid(cfg.d, cfg.M, cfg.L);
    const auto rho_vals = cfg.rho0.grid_values(grid);

    // Base profile g1 (unit amplitude); g = a * g1 scaled below.
    scenario::TestFunctionSpec gspec =
        cfg.phis.empty() ? scenario::TestFunctionSpec{} : cfg.phis.front();
    gspec.amplitude = 1.0;
    const auto g1 = gspec.materialize(cfg.d);

    // <g1, rho> and range of g1 by grid quadrature / scan.
    const double vol = grid.cell_volume();
    double m0 = 0.0, g1_max = -1e300, g1_min = 1e300;
    std::vector<double> x(static_cast<std::size_t>(cfg.d));
    for (long c = 0; c < grid.size(); ++c) {
        if (cfg.d == 1) {
            x[0] = grid.node(static_cast<int>(c));
        } else {
            x[0] = grid.node(static_cast<int>(c / grid.M));
            x[1] = grid.node(static_cast<int>(c % grid.M));
        }
        const double g = g1.value(x);
        m0 += g * rho_vals[static_cast<std::size_t>(c)] * vol;
        g1_max = std::max(g1_max, g);
        g1_min = std::min(g1_min, g);
    }

    // Solve the amplitude so that sup |g - <g,rho>| = sqrt(phi_sup), making
    // the product function phi(x,y) reach exactly the target sup norm.
    const double s = std::sqrt(std::max(set.phi_sup, 0.0));
    const double spread = std::max(g1_max - m0, m0 - g1_min);
    const double a = spread > 0 ? s / spread : 0.0;
    const double phi_sup = s * s;

    const double kappa =
        set.kappa > 0.0
            ? set.kappa
            : 1.0 / (8.0 * std::exp(4.5) *
                     std::pow(bessel_l1_norm(cfg.d, cfg.alpha), 2));

    // Smallness gates from the exponential-moment lemmas; exceeding them means
    // no finite bound exists, so the campaign refuses to run.
    for (int p : set.p_list) {
        if (p != 2 && p != 4)
            throw std::invalid_argument("elln_campaign: p must be 2 or 4");
        if (p == 2) {
            const double a0 = std::exp(9.0) * kappa * phi_sup * phi_sup;
            const double b0 = 4.0 * std::exp(1.0) * kappa * phi_sup * phi_sup;
            if (a0 >= 1.0 || b0 >= 1.0)
                throw std::invalid_argument(
                    "elln_campaign: smallness condition violated for p=2 "
                    "(e^9 kappa ||phi||^2 = " +
                    std::to_string(a0) + " must be < 1); no bound available");
        } else {
            const double a0 =
                std::exp(14.0) * kappa * std::pow(phi_sup, 4.0);
            if (a0 >= 1.0)
                throw std::invalid_argument(
                    "elln_campaign: smallness condition violated for p=4 "
                    "(e^14 kappa ||phi||^4 = " +
                    std::to_string(a0) + " must be < 1); no bound available");
        }
    }

    const auto plan = cfg.rng_plan();
    const int nN = static_cast<int>(set.N_list.size());
    const long S = set.samples;

    // |<phi, mu_N x mu_N>| = ((1/N) sum (g(X_i) - <g,rho>))^2, per sample.
    std::vector<std::vector<double>> pairings(
        static_cast<std::size_t>(nN),
        std::vector<double>(static_cast<std::size_t>(S), 0.0));
    parallel_for(nN, threads, [&](int iN) {
        const int N = set.N_list[static_cast<std::size_t>(iN)];
        scenario::GaussianStream stream(
            plan.sampling_seed(static_cast<std::uint64_t>(iN)));
        std::vector<double> pos(static_cast<std::size_t>(N) *
                                static_cast<std::size_t>(cfg.d));
        std::vector<double> xi(static_cast<std::size_t>(cfg.d));
        for (long smp = 0; smp < S; ++smp) {
            cfg.rho0.sample(N, cfg.L, stream, pos);
            double acc = 0.0;
            for (int i = 0; i < N; ++i) {
                for (int q = 0; q < cfg.d; ++q)
                    xi[static_cast<std::size_t>(q)] =
                        pos[static_cast<std::size_t>(i) * cfg.d + q];
                acc += a * (g1.value(xi) - m0);
            }
            const double hbar = acc / N;
            pairings[static_cast<std::size_t>(iN)]
                    [static_cast<std::size_t>(smp)] = hbar * hbar;
        }
    });

    std::vector<ElLnResult> results;
    for (int p : set.p_list) {
        ElLnResult res;
        res.p = p;
        res.kappa = kappa;
        res.phi_sup = phi_sup;
        res.N_list = set.N_list;
        if (p == 2) {
            res.alpha0 = std::exp(9.0) * kappa * phi_sup * phi_sup;
            res.beta0 = 4.0 * std::exp(1.0) * kappa * phi_sup * phi_sup;
            res.bound = std::log(1.0 + res.alpha0 / (1.0 - res.alpha0) +
                                 res.beta0 / (1.0 - res.beta0));
        } else {
            res.alpha0 = std::exp(14.0) * kappa * std::pow(phi_sup, 4.0);
            res.beta0 = kNaN;
            res.bound = kNaN;  // the p=4 lemma constant is not explicit
        }

        std::vector<double> exponents(static_cast<std::size_t>(S));
        for (int iN = 0; iN < nN; ++iN) {
            const double N = set.N_list[static_cast<std::size_t>(iN)];
            const auto& pr = pairings[static_cast<std::size_t>(iN)];
            for (long smp = 0; smp < S; ++smp) {
                const double v = pr[static_cast<std::size_t>(smp)];
                exponents[static_cast<std::size_t>(smp)] =
                    kappa * N * (p == 2 ? v * v : v * v * v * v);
            }
            bool heavy = false;
            res.estimate.push_back(log_mean_exp(exponents, &heavy));
            res.estimate_se.push_back(log_mean_exp_batch_se(exponents, 100));
            res.heavy_tail.push_back(heavy);
        }
        res.trend_rho = spearman_rho(to_double(res.N_list), res.estimate);
        res.flat = res.trend_rho <= 0.3;
        if (p == 2) {
            res.below_bound =
                std::all_of(res.estimate.begin(), res.estimate.end(),
                            [&](double e) { return e <= res.bound; });
        } else {
            res.below_bound = res.flat;
        }
        results.push_back(std::move(res));
    }
    return results;
}

// ---------------------------------------------------------------------------
// Fluctuation increments
// ---------------------------------------------------------------------------

IncrementResult increment_campaign(const scenario::ScenarioConfig& cfg,
                                   int threads) {
    const auto& lf = cfg.increments.lag_fractions;
    if (lf.size() < 3)
        throw std::invalid_argument("increment_campaign: need at least 3 lags");
    if (cfg.alpha_interaction <= cfg.d / 2.0 + 2.0)
        throw std::invalid_argument(
            "increment_campaign: norm exponent must exceed d/2 + 2 for the "
            "increment bound to apply");

    const double dt = cfg.T / cfg.n_steps;
    std::vector<int> lag_steps;
    for (double f : lf) {
        const double raw = f * cfg.n_steps;
        const int steps = static_cast<int>(std::lround(raw));
        if (std::abs(raw - steps) > 1e-9 * cfg.n_steps || steps < 1 ||
            steps > cfg.n_steps)
            throw std::invalid_argument(
                "increment_campaign: lag fraction " + std::to_string(f) +
                " is not a whole number of steps in (0, T]");
        lag_steps.push_back(steps);
    }

    // Capture indices: T - lag for each lag, plus T itself.
    std::set<int> capture_set{cfg.n_steps};
    for (int sl : lag_steps) capture_set.insert(cfg.n_steps - sl);
    const std::vector<int> captures(capture_set.begin(), capture_set.end());
    const auto slot_of = [&](int step) {
        return static_cast<int>(
            std::lower_bound(captures.begin(), captures.end(), step) -
            captures.begin());
    };

    const Grid grid(cfg.d, cfg.M, cfg.L);
    const FpSolver solver(grid, cfg.kernel, cfg.sigma, cfg.nu);
    const auto rho0_values = cfg.rho0.grid_values(grid);
    const auto lattice = field_lattice(cfg, grid);
    const auto plan = cfg.rng_plan();
    const int N = cfg.N_list.back();
    const int R = cfg.R;
    const int n_lag = static_cast<int>(lag_steps.size());
    const double alpha = cfg.alpha_interaction;
    const double rootN = std::sqrt(static_cast<double>(N));

    // [lag][replica] -> squared increment norm
    std::vector<std::vector<double>> sq(
        static_cast<std::size_t>(n_lag),
        std::vector<double>(static_cast<std::size_t>(R), 0.0));

    parallel_for(R, threads, [&](int r) {
        const auto path = draw_path(cfg, plan, r, dt);
        auto ens = particles::make_initial_ensemble(cfg, N, r, path);
        particles::IdioStreams idio(plan, r, N);
        DensityField rho(grid, rho0_values, solver.transform());

        std::vector<sobolev::EmpiricalSpectrum> eta(captures.size());
        const auto capture = [&](int step) {
            const auto it =
                std::lower_bound(captures.begin(), captures.end(), step);
            if (it == captures.end() || *it != step) return;
            const auto Fp = sobolev::empirical_fourier(ens.X, N, cfg.d, lattice);
            const auto Ff = sobolev::field_fourier(rho, lattice);
            eta[static_cast<std::size_t>(slot_of(step))] =
                sobolev::combine_spectra(Fp, rootN, Ff, -rootN);
        };

        capture(0);
        for (int s = 0; s < cfg.n_steps; ++s) {
            particles::step_euler(ens, dt, cfg.sigma, cfg.nu, cfg.kernel, idio,
                                  path.increment(s));
            solver.step(rho, dt, path.increment(s));
            capture(s + 1);
        }

        const auto& eta_T = eta[static_cast<std::size_t>(slot_of(cfg.n_steps))];
        for (int i = 0; i < n_lag; ++i) {
            const auto& eta_s = eta[static_cast<std::size_t>(
                slot_of(cfg.n_steps - lag_steps[static_cast<std::size_t>(i)]))];
            const auto inc = sobolev::combine_spectra(eta_T, 1.0, eta_s, -1.0);
            sq[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)] =
                sobolev::h_neg_alpha_norm(inc, alpha).value_sq;
        }
    });

    IncrementResult out;
    out.N = N;
    out.alpha = alpha;
    std::vector<double> powered(static_cast<std::size_t>(R));
    for (int i = 0; i < n_lag; ++i) {
        const double lag = lag_steps[static_cast<std::size_t>(i)] * dt;
        out.lags.push_back(lag);
        for (int r = 0; r < R; ++r) {
            const double v =
                sq[static_cast<std::size_t>(i)][static_cast<std::size_t>(r)];
            powered[static_cast<std::size_t>(r)] = v * v;
            out.samples.push_back(
                {N, r, lag, alpha, v, 0.0, "increment"});
        }
        out.fourth_moment.push_back(sample_mean(powered));
        out.fourth_moment_se.push_back(mean_se(powered));
    }
    out.fit = fit_loglog_slope(out.lags, out.fourth_moment,
                               out.fourth_moment_se);
    return out;
}

// ---------------------------------------------------------------------------
// Marginal relative entropy proxy
// ---------------------------------------------------------------------------

MarginalKlResult marginal_kl(std::span<const double> positions, long n_pooled,
                             int d, const meanfield::DensityField& rho) {
    if (n_pooled < 10000)
        throw std::invalid_argument(
            "marginal_kl: pooled sample size must be at least 10^4");

    std::vector<double> xs(static_cast<std::size_t>(n_pooled));
    for (long i = 0; i < n_pooled; ++i)
        xs[static_cast<std::size_t>(i)] =
            positions[static_cast<std::size_t>(i) * d];

    // Axis-0 marginal of the field on the grid axis.
    const auto& grid = rho.grid;
    std::vector<double> marginal(static_cast<std::size_t>(grid.M), 0.0);
    if (d == 1) {
        marginal.assign(rho.values.begin(), rho.values.end());
    } else {
        for (int j0 = 0; j0 < grid.M; ++j0) {
            double acc = 0.0;
            for (int j1 = 0; j1 < grid.M; ++j1)
                acc += rho.values[static_cast<std::size_t>(grid.index(j0, j1))];
            marginal[static_cast<std::size_t>(j0)] = acc * grid.h();
        }
    }

    // Periodic linear interpolation of the marginal density.
    const auto density = [&](double x) {
        const double u = (x + grid.L) / grid.h();
        const long j = static_cast<long>(std::floor(u));
        const double w = u - j;
        const int j0 = static_cast<int>(((j % grid.M) + grid.M) % grid.M);
        const int j1 = (j0 + 1) % grid.M;
        const double v = (1.0 - w) * marginal[static_cast<std::size_t>(j0)] +
                         w * marginal[static_cast<std::size_t>(j1)];
        return std::max(v, 0.0);
    };

    const auto hist = fd_histogram(xs);
    MarginalKlResult out;
    out.pooled = n_pooled;
    out.bins = static_cast<int>(hist.probability.size());
    out.kl = histogram_kl(hist, density, &out.smoothed);
    return out;
}

std::vector<MarginalKlResult> entropy_campaign(
    const scenario::ScenarioConfig& cfg, int threads) {
    const Grid grid(cfg.d, cfg.M, cfg.L);
    const FpSolver solver(grid, cfg.kernel, cfg.sigma, cfg.nu);
    auto plan = cfg.rng_plan();
    plan.shared_common_noise = true;  // all replicas must target one rho_T
    const double dt = cfg.T / cfg.n_steps;
    const auto path = draw_path(cfg, plan, 0, dt);

    DensityField rho(grid, cfg.rho0.grid_values(grid), solver.transform());
    for (int s = 0; s < cfg.n_steps; ++s)
        solver.step(rho, dt, path.increment(s));

    std::vector<MarginalKlResult> results;
    for (int N : cfg.N_list) {
        std::vector<std::vector<double>> finals(
            static_cast<std::size_t>(cfg.R));
        parallel_for(cfg.R, threads, [&](int r) {
            auto ens = particles::make_initial_ensemble(cfg, N, r, path);
            particles::IdioStreams idio(plan, r, N);
            for (int s = 0; s < cfg.n_steps; ++s)
                particles::step_euler(ens, dt, cfg.sigma, cfg.nu, cfg.kernel,
                                      idio, path.increment(s));
            finals[static_cast<std::size_t>(r)] = std::move(ens.X);
        });
        std::vector<double> pooled;
        pooled.reserve(static_cast<std::size_t>(cfg.R) * N * cfg.d);
        for (auto& f : finals)
            pooled.insert(pooled.end(), f.begin(), f.end());
        auto res = marginal_kl(pooled, static_cast<long>(cfg.R) * N, cfg.d, rho);
        res.N = N;
        results.push_back(res);
    }
    return results;
}

}  // namespace fluctlab::statlab
