#include "fluctlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace fluctlab::statlab {

namespace {

/// Two-sided 97.5% Student-t quantiles for dof 1..30; 1.96 beyond.
double t_quantile_975(int dof) {
  static constexpr double table[30] = {
      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
      2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
      2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
  if (dof < 1) return table[0];
  if (dof <= 30) return table[dof - 1];
  return 1.96;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

}  // namespace

SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y,
                          std::span<const double> y_se) {
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 points");
  if (y.size() != x.size())
    throw std::invalid_argument("fit_loglog_slope: size mismatch");
  const bool weighted = !y_se.empty();
  if (weighted && y_se.size() != x.size())
    throw std::invalid_argument("fit_loglog_slope: se size mismatch");

  SlopeFit fit;
  fit.abscissa.assign(x.begin(), x.end());
  fit.ordinate.assign(y.begin(), y.end());
  if (weighted) fit.ordinate_se.assign(y_se.begin(), y_se.end());

  std::vector<double> lx(n), ly(n), w(n, 1.0);
  for (int i = 0; i < n; ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0)
      throw std::invalid_argument("fit_loglog_slope: data must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    if (weighted) {
      const double rel = y_se[i] / y[i];  // se of log y
      w[i] = rel > 0.0 ? 1.0 / (rel * rel) : 1.0;
    }
  }
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (int i = 0; i < n; ++i) {
    sw += w[i];
    swx += w[i] * lx[i];
    swy += w[i] * ly[i];
  }
  const double mx = swx / sw, my = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
    sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;

  // Residual-scaled slope SE (accounts for misestimated weights).
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += w[i] * r * r;
  }
  const int dof = n - 2;
  const double s2 = dof > 0 ? rss / dof : 0.0;
  fit.slope_se = std::sqrt(s2 / sxx);
  const double tq = t_quantile_975(dof);
  fit.ci_low = fit.slope - tq * fit.slope_se;
  fit.ci_high = fit.slope + tq * fit.slope_se;
  return fit;
}

double sample_mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double sample_variance(std::span<const double> xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 2) return 0.0;
  const double m = sample_mean(xs);
  double s = 0.0;
  for (double v : xs) s += (v - m) * (v - m);
  return s / (n - 1);
}

double sample_covariance(std::span<const double> xs, std::span<const double> ys) {
  const long n = static_cast<long>(xs.size());
  if (ys.size() != xs.size())
    throw std::invalid_argument("sample_covariance: size mismatch");
  if (n < 2) return 0.0;
  const double mx = sample_mean(xs), my = sample_mean(ys);
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += (xs[i] - mx) * (ys[i] - my);
  return s / (n - 1);
}

double mean_se(std::span<const double> xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 2) return 0.0;
  return std::sqrt(sample_variance(xs) / n);
}

double jackknife_se(long n, const std::function<double(long)>& stat_without) {
  if (n < 2) return 0.0;
  std::vector<double> loo(n);
  for (long i = 0; i < n; ++i) loo[i] = stat_without(i);
  const double m = sample_mean(loo);
  double s = 0.0;
  for (double v : loo) s += (v - m) * (v - m);
  return std::sqrt(s * (n - 1) / n);
}

double jackknife_variance_se(std::span<const double> xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 3) return 0.0;
  const double m = sample_mean(xs);
  double S = 0.0;
  for (double v : xs) S += (v - m) * (v - m);
  // Leave-one-out sum of squares: S_(i) = S - n/(n-1) (x_i - m)^2.
  std::vector<double> loo(n);
  for (long i = 0; i < n; ++i) {
    const double di = xs[i] - m;
    loo[i] = (S - di * di * n / (n - 1.0)) / (n - 2.0);
  }
  const double lm = sample_mean(loo);
  double s = 0.0;
  for (double v : loo) s += (v - lm) * (v - lm);
  return std::sqrt(s * (n - 1) / n);
}

double jackknife_covariance_se(std::span<const double> xs,
                               std::span<const double> ys) {
  const long n = static_cast<long>(xs.size());
  if (ys.size() != xs.size())
    throw std::invalid_argument("jackknife_covariance_se: size mismatch");
  if (n < 3) return 0.0;
  const double mx = sample_mean(xs), my = sample_mean(ys);
  double S = 0.0;
  for (long i = 0; i < n; ++i) S += (xs[i] - mx) * (ys[i] - my);
  std::vector<double> loo(n);
  for (long i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    loo[i] = (S - dx * dy * n / (n - 1.0)) / (n - 2.0);
  }
  const double lm = sample_mean(loo);
  double s = 0.0;
  for (double v : loo) s += (v - lm) * (v - lm);
  return std::sqrt(s * (n - 1) / n);
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_statistic_cdf(std::vector<double> sorted,
                        const std::function<double(double)>& cdf) {
  const long n = static_cast<long>(sorted.size());
  double d = 0.0;
  for (long i = 0; i < n; ++i) {
    const double F = cdf(sorted[i]);
    d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
  }
  return d;
}

}  // namespace

KsResult ks_test_normal(std::span<const double> xs, double mean, double sd) {
  if (xs.size() < 5) throw std::invalid_argument("ks_test_normal: need >= 5 samples");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  KsResult r;
  r.statistic = ks_statistic_cdf(
      std::move(s), [&](double x) { return normal_cdf((x - mean) / sd); });
  // Stephens' finite-n correction for a fully specified null.
  r.p_value = kolmogorov_q(r.statistic *
                           (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)));
  return r;
}

KsResult ks_test_normal_fitted(std::span<const double> xs) {
  if (xs.size() < 5)
    throw std::invalid_argument("ks_test_normal_fitted: need >= 5 samples");
  const double m = sample_mean(xs);
  const double sd = std::sqrt(sample_variance(xs));
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  KsResult r;
  r.statistic =
      ks_statistic_cdf(std::move(s), [&](double x) { return normal_cdf((x - m) / sd); });

  // Dallal–Wilkinson (1986) p-value for the estimated-parameter normal null,
  // with the Stephens polynomial branch when the approximation leaves its
  // accurate range (the scheme used by the usual Lilliefors implementations).
  const double D = r.statistic;
  double Kd = D, nd = n;
  if (n > 100.0) {
    Kd = D * std::pow(n / 100.0, 0.49);
    nd = 100.0;
  }
  double p = std::exp(-7.01256 * Kd * Kd * (nd + 2.78019) +
                      2.99587 * Kd * std::sqrt(nd + 2.78019) - 0.122119 +
                      0.974598 / std::sqrt(nd) + 1.67997 / nd);
  if (p > 0.1) {
    const double KK = (std::sqrt(n) - 0.01 + 0.85 / std::sqrt(n)) * D;
    if (KK <= 0.302) {
      p = 1.0;
    } else if (KK <= 0.5) {
      p = 2.76773 - 19.828315 * KK + 80.709644 * KK * KK -
          138.55152 * KK * KK * KK + 81.218052 * KK * KK * KK * KK;
    } else if (KK <= 0.9) {
      p = -4.901232 + 40.662806 * KK - 97.490286 * KK * KK +
          94.029866 * KK * KK * KK - 32.355711 * KK * KK * KK * KK;
    } else if (KK <= 1.31) {
      p = 6.198765 - 19.558097 * KK + 23.186922 * KK * KK -
          12.234627 * KK * KK * KK + 2.423045 * KK * KK * KK * KK;
    } else {
      p = 0.0;
    }
  }
  r.p_value = std::clamp(p, 0.0, 1.0);
  return r;
}

KsResult ks_test_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 5 || b.size() < 5)
    throw std::invalid_argument("ks_test_two_sample: need >= 5 samples each");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const long na = static_cast<long>(sa.size()), nb = static_cast<long>(sb.size());
  long ia = 0, ib = 0;
  double d = 0.0;
  while (ia < na && ib < nb) {
    const double x = std::min(sa[ia], sb[ib]);
    while (ia < na && sa[ia] <= x) ++ia;
    while (ib < nb && sb[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na -
                             static_cast<double>(ib) / nb));
  }
  KsResult r;
  r.statistic = d;
  const double ne = static_cast<double>(na) * nb / (na + nb);
  r.p_value = kolmogorov_q((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d);
  return r;
}

namespace {

std::vector<double> ranks_with_ties(std::span<const double> x) {
  const long n = static_cast<long>(x.size());
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](long a, long b) { return x[a] < x[b]; });
  std::vector<double> rank(n);
  long i = 0;
  while (i < n) {
    long j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * (i + j) + 1.0;
    for (long k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("spearman_rho: need matched samples, n >= 3");
  const auto rx = ranks_with_ties(x);
  const auto ry = ranks_with_ties(y);
  const double c = sample_covariance(rx, ry);
  const double vx = sample_variance(rx), vy = sample_variance(ry);
  if (vx == 0.0 || vy == 0.0) return 0.0;
  return c / std::sqrt(vx * vy);
}

Histogram fd_histogram(std::span<const double> xs) {
  const long n = static_cast<long>(xs.size());
  if (n < 4) throw std::invalid_argument("fd_histogram: need >= 4 samples");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double q1 = s[static_cast<long>(0.25 * (n - 1))];
  const double q3 = s[static_cast<long>(0.75 * (n - 1))];
  const double span = s.back() - s.front();
  double width = 2.0 * (q3 - q1) * std::pow(static_cast<double>(n), -1.0 / 3.0);
  if (width <= 0.0)
    width = span > 0.0 ? span / std::ceil(std::sqrt(static_cast<double>(n))) : 1.0;
  Histogram h;
  h.lo = s.front();
  h.width = width;
  const long bins = std::max<long>(1, static_cast<long>(std::ceil(span / width)) + 1);
  h.probability.assign(bins, 0.0);
  for (double v : s) {
    long b = static_cast<long>((v - h.lo) / width);
    b = std::clamp<long>(b, 0, bins - 1);
    h.probability[b] += 1.0 / n;
  }
  return h;
}

double histogram_kl(const Histogram& h,
                    const std::function<double(double)>& model_density,
                    bool* smoothed) {
  if (smoothed) *smoothed = false;
  double kl = 0.0;
  for (std::size_t b = 0; b < h.probability.size(); ++b) {
    const double p = h.probability[b];
    if (p <= 0.0) continue;
    const double mid = h.lo + (b + 0.5) * h.width;
    double q = model_density(mid) * h.width;
    if (q < 1e-12) {
      q += 1e-12;
      if (smoothed) *smoothed = true;
    }
    kl += p * std::log(p / q);
  }
  return kl;
}

double log_mean_exp(std::span<const double> exponents, bool* heavy_tail) {
  const long S = static_cast<long>(exponents.size());
  if (S == 0) throw std::invalid_argument("log_mean_exp: empty sample");
  const double mx = *std::max_element(exponents.begin(), exponents.end());
  double total = 0.0;
  for (double a : exponents) total += std::exp(a - mx);
  if (heavy_tail) {
    std::vector<double> s(exponents.begin(), exponents.end());
    std::sort(s.begin(), s.end());
    const long top = std::max<long>(1, S / 100);
    double top_mass = 0.0;
    for (long i = S - top; i < S; ++i) top_mass += std::exp(s[i] - mx);
    *heavy_tail = top_mass > 0.5 * total;
  }
  return mx + std::log(total) - std::log(static_cast<double>(S));
}

}  // namespace fluctlab::statlab
