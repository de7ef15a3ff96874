#include "fluctlab/densities.hpp"

#include "fluctlab/grid.hpp"
#include "fluctlab/rng.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fluctlab::scenario {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2_v<double> / 2.0); }

}  // namespace

void DensitySpec::validate(double L) const {
  if (d < 1 || d > 2) throw std::invalid_argument("density: d must be 1 or 2");
  if (variant == DensityVariant::Uniform) {
    if (uniform_half_width <= 0.0 || uniform_half_width > L)
      throw std::invalid_argument("density: uniform half-width must lie in (0, L]");
    return;
  }
  if (components.empty())
    throw std::invalid_argument("density: mixture needs at least one component");
  double wsum = 0.0;
  for (const auto& c : components) {
    if (c.weight <= 0.0) throw std::invalid_argument("density: weights must be > 0");
    if (c.sd <= 0.0) throw std::invalid_argument("density: sd must be > 0");
    if (static_cast<int>(c.mean.size()) != d)
      throw std::invalid_argument("density: component mean must have d entries");
    wsum += c.weight;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("density: weights must sum to 1");
  box_mass(L);  // throws when the truncation leaves no mass
}

double DensitySpec::box_mass(double L) const {
  if (variant == DensityVariant::Uniform) return 1.0;
  double z = 0.0;
  for (const auto& c : components) {
    double comp = 1.0;
    for (int q = 0; q < d; ++q) {
      const double a = (-L - c.mean[q]) / c.sd;
      const double b = (L - c.mean[q]) / c.sd;
      comp *= normal_cdf(b) - normal_cdf(a);
    }
    z += c.weight * comp;
  }
  if (z < 1e-12)
    throw std::invalid_argument("density: no mass left in the box after truncation");
  return z;
}

double DensitySpec::density(std::span<const double> x, double L) const {
  assert(static_cast<int>(x.size()) == d);
  for (int q = 0; q < d; ++q)
    if (x[q] < -L || x[q] >= L) return 0.0;
  if (variant == DensityVariant::Uniform) {
    for (int q = 0; q < d; ++q)
      if (std::abs(x[q]) > uniform_half_width) return 0.0;
    double vol = 1.0;
    for (int q = 0; q < d; ++q) vol *= 2.0 * uniform_half_width;
    return 1.0 / vol;
  }
  double val = 0.0;
  for (const auto& c : components) {
    double comp = c.weight;
    for (int q = 0; q < d; ++q)
      comp *= normal_pdf((x[q] - c.mean[q]) / c.sd) / c.sd;
    val += comp;
  }
  return val / box_mass(L);
}

std::vector<double> DensitySpec::truncated_mean(double L) const {
  std::vector<double> mu(d, 0.0);
  if (variant == DensityVariant::Uniform) return mu;
  const double z = box_mass(L);
  for (const auto& c : components) {
    // Per-axis truncated-normal mean; the component weight inside the box is
    // w * prod_q P_q, and axis q's conditional mean is
    //   mean_q + sd * (pdf(a)-pdf(b)) / P_q.
    double in_box = 1.0;
    std::vector<double> axis_mean(d);
    for (int q = 0; q < d; ++q) {
      const double a = (-L - c.mean[q]) / c.sd;
      const double b = (L - c.mean[q]) / c.sd;
      const double p = normal_cdf(b) - normal_cdf(a);
      in_box *= p;
      axis_mean[q] = c.mean[q] + c.sd * (normal_pdf(a) - normal_pdf(b)) / p;
    }
    for (int q = 0; q < d; ++q) mu[q] += c.weight * in_box * axis_mean[q];
  }
  for (int q = 0; q < d; ++q) mu[q] /= z;
  return mu;
}

void DensitySpec::sample(int N, double L, GaussianStream& stream,
                         std::span<double> out) const {
  assert(static_cast<int>(out.size()) == N * d);
  if (variant == DensityVariant::Uniform) {
    for (int i = 0; i < N * d; ++i)
      out[i] = uniform_half_width * (2.0 * stream.uniform() - 1.0);
    return;
  }
  const size_t nc = components.size();
  std::vector<double> cum(nc);
  double acc = 0.0;
  for (size_t c = 0; c < nc; ++c) {
    acc += components[c].weight;
    cum[c] = acc;
  }
  for (int i = 0; i < N; ++i) {
    size_t c = 0;
    if (nc > 1) {
      const double u = stream.uniform() * acc;
      while (c + 1 < nc && u > cum[c]) ++c;
    }
    const auto& comp = components[c];
    // Rejection against the box; with the shipped box sizes the acceptance
    // probability is ~1, and rejection keeps the truncated law exact.
    for (;;) {
      bool ok = true;
      for (int q = 0; q < d; ++q) {
        const double x = comp.mean[q] + comp.sd * stream.normal();
        out[static_cast<size_t>(i) * d + q] = x;
        if (x < -L || x >= L) ok = false;
      }
      if (ok) break;
    }
  }
}

std::vector<double> DensitySpec::grid_values(const meanfield::Grid& grid) const {
  const size_t n = grid.size();
  std::vector<double> v(n);
  std::vector<double> x(d);
  if (d == 1) {
    for (int j = 0; j < grid.M; ++j) {
      x[0] = grid.node(j);
      v[j] = density(x, grid.L);
    }
  } else {
    for (int j0 = 0; j0 < grid.M; ++j0)
      for (int j1 = 0; j1 < grid.M; ++j1) {
        x[0] = grid.node(j0);
        x[1] = grid.node(j1);
        v[grid.index(j0, j1)] = density(x, grid.L);
      }
  }
  double mass = 0.0;
  for (double f : v) mass += f;
  mass *= grid.cell_volume();
  if (mass < 1e-12)
    throw std::invalid_argument("density: grid mass vanished after truncation");
  for (double& f : v) f /= mass;
  return v;
}

std::string DensitySpec::variant_name() const {
  return variant == DensityVariant::Uniform ? "uniform" : "gaussian_mixture";
}

DensitySpec make_uniform_density(int d, double half_width) {
  DensitySpec s;
  s.variant = DensityVariant::Uniform;
  s.d = d;
  s.uniform_half_width = half_width;
  return s;
}

DensitySpec make_gaussian_density(int d, std::vector<double> mean, double sd) {
  DensitySpec s;
  s.variant = DensityVariant::GaussianMixture;
  s.d = d;
  s.components.push_back({1.0, std::move(mean), sd});
  return s;
}

DensitySpec make_mixture_density(int d, std::vector<MixtureComponent> comps) {
  DensitySpec s;
  s.variant = DensityVariant::GaussianMixture;
  s.d = d;
  s.components = std::move(comps);
  return s;
}

}  // namespace fluctlab::scenario
