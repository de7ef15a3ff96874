#pragma once

#include "fluctlab/fft.hpp"
#include "fluctlab/grid.hpp"
#include "fluctlab/test_functions.hpp"

#include <span>
#include <vector>

namespace fluctlab::meanfield {

/// Real grid function (a density rho_t or a fluctuation field eta_t) together
/// with its spectral twin in the integral convention of SpectralTransform.
/// The solvers keep the spectrum authoritative between steps; values are
/// refreshed after each inverse transform.
struct DensityField {
  Grid grid;
  double t = 0.0;
  std::vector<double> values;   // grid.size()
  std::vector<cplx> spectrum;   // grid.size()

  DensityField() = default;
  DensityField(const Grid& g, std::vector<double> v, const SpectralTransform& tr);

  double mass() const;
};

/// <phi, f> by uniform-grid quadrature (phi evaluated at the nodes).
double pair_with(const DensityField& f, const scenario::TestFunction& phi);

/// <g, f> for a pre-tabulated grid function g.
double pair_values(const DensityField& f, std::span<const double> g);

/// phi and its partial derivatives sampled on the grid nodes, for fast
/// repeated pairings.
struct TabulatedPhi {
  std::string name;
  std::vector<double> phi;                 // grid.size()
  std::vector<std::vector<double>> dphi;   // d arrays of grid.size()
};

TabulatedPhi tabulate(const Grid& grid, const scenario::TestFunction& phi);

/// ||a - b||_L2 / ||b||_L2 over the grid.
double relative_l2_error(std::span<const double> a, std::span<const double> b);

}  // namespace fluctlab::meanfield
