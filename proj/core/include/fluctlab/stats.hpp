#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fluctlab::statlab {

/// Weighted least-squares line fit in log-log coordinates with a 95% CI on
/// the slope (t quantile with n-2 degrees of freedom).
struct SlopeFit {
  std::vector<double> abscissa;
  std::vector<double> ordinate;
  std::vector<double> ordinate_se;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// x, y must be positive; y_se (same units as y) may be empty for an
/// unweighted fit. Requires at least 3 points.
SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y,
                          std::span<const double> y_se);

double sample_mean(std::span<const double> xs);
/// Unbiased sample variance.
double sample_variance(std::span<const double> xs);
/// Unbiased sample covariance.
double sample_covariance(std::span<const double> xs, std::span<const double> ys);
/// Standard error of the sample mean.
double mean_se(std::span<const double> xs);

/// Delete-1 jackknife standard error of an arbitrary statistic; stat(i) must
/// return the statistic computed with sample i removed.
double jackknife_se(long n, const std::function<double(long)>& stat_without);
/// Jackknife SE of the unbiased sample variance (closed-form leave-one-out).
double jackknife_variance_se(std::span<const double> xs);
/// Jackknife SE of the unbiased sample covariance.
double jackknife_covariance_se(std::span<const double> xs,
                               std::span<const double> ys);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Kolmogorov limit tail Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// One-sample KS against a fully specified N(mean, sd); p-value by the
/// finite-n–corrected asymptotic tail.
KsResult ks_test_normal(std::span<const double> xs, double mean, double sd);

/// One-sample KS against the normal with fitted mean and sd; p-value by the
/// Dallal–Wilkinson approximation for the estimated-parameter null.
KsResult ks_test_normal_fitted(std::span<const double> xs);

/// Two-sample KS with the asymptotic p-value.
KsResult ks_test_two_sample(std::span<const double> a, std::span<const double> b);

/// Spearman rank correlation (average ranks on ties).
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<double> probability;  // per bin, sums to 1
};

/// Freedman–Diaconis histogram of the samples (falls back to sqrt(n) bins
/// when the IQR degenerates).
Histogram fd_histogram(std::span<const double> xs);

/// KL(histogram || model) where model(x) is a probability density; the model
/// mass per bin is taken at the bin midpoint. Empty model bins get 1e-12
/// additive smoothing; *smoothed is set when that happens.
double histogram_kl(const Histogram& h,
                    const std::function<double(double)>& model_density,
                    bool* smoothed);

/// log( (1/S) sum exp(a_s) ) computed against overflow; *heavy_tail is set
/// when the top 1% of samples carries more than half the exponential mass.
double log_mean_exp(std::span<const double> exponents, bool* heavy_tail);

}  // namespace fluctlab::statlab
