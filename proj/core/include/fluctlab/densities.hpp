#pragma once

#include <span>
#include <string>
#include <vector>

namespace fluctlab::meanfield {
struct Grid;
}  // namespace fluctlab::meanfield

namespace fluctlab::scenario {

class GaussianStream;

enum class DensityVariant { Uniform, GaussianMixture };

/// One isotropic Gaussian component before truncation.
struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;  // d entries
  double sd = 1.0;
};

/// Initial density on the box [-L, L)^d: either uniform on a centered sub-box
/// of half-width `uniform_half_width`, or a Gaussian mixture truncated to the
/// box and renormalized. All closed forms below are for the truncated law.
struct DensitySpec {
  DensityVariant variant = DensityVariant::GaussianMixture;
  int d = 1;
  double uniform_half_width = 1.0;
  std::vector<MixtureComponent> components;

  void validate(double L) const;

  /// Mass of the un-truncated spec inside the box (the renormalization
  /// constant); throws if below 1e-12.
  double box_mass(double L) const;

  /// Truncated, renormalized density at x.
  double density(std::span<const double> x, double L) const;

  /// Mean of the truncated law, per axis.
  std::vector<double> truncated_mean(double L) const;

  /// N i.i.d. draws into out (N*d, row-major), by per-component rejection.
  void sample(int N, double L, GaussianStream& stream,
              std::span<double> out) const;

  /// Density values at the grid nodes, renormalized to exact unit grid mass.
  std::vector<double> grid_values(const meanfield::Grid& grid) const;

  std::string variant_name() const;
};

DensitySpec make_uniform_density(int d, double half_width);
DensitySpec make_gaussian_density(int d, std::vector<double> mean, double sd);
DensitySpec make_mixture_density(int d, std::vector<MixtureComponent> comps);

}  // namespace fluctlab::scenario
