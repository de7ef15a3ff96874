#include "fluctlab/density_field.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace fluctlab::meanfield {

DensityField::DensityField(const Grid& g, std::vector<double> v,
                           const SpectralTransform& tr)
    : grid(g), values(std::move(v)), spectrum(g.size()) {
  if (static_cast<long>(values.size()) != g.size())
    throw std::invalid_argument("density field: values size mismatch");
  tr.forward(values, spectrum);
}

double DensityField::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

double pair_with(const DensityField& f, const scenario::TestFunction& phi) {
  const Grid& g = f.grid;
  double acc = 0.0;
  double x[2];
  if (g.d == 1) {
    for (int j = 0; j < g.M; ++j) {
      x[0] = g.node(j);
      acc += phi.value(std::span<const double>(x, 1)) * f.values[j];
    }
  } else {
    for (int j0 = 0; j0 < g.M; ++j0)
      for (int j1 = 0; j1 < g.M; ++j1) {
        x[0] = g.node(j0);
        x[1] = g.node(j1);
        acc += phi.value(std::span<const double>(x, 2)) * f.values[g.index(j0, j1)];
      }
  }
  return acc * g.cell_volume();
}

double pair_values(const DensityField& f, std::span<const double> g) {
  assert(g.size() == f.values.size());
  double acc = 0.0;
  for (size_t i = 0; i < g.size(); ++i) acc += g[i] * f.values[i];
  return acc * f.grid.cell_volume();
}

TabulatedPhi tabulate(const Grid& grid, const scenario::TestFunction& phi) {
  TabulatedPhi t;
  t.name = phi.name;
  t.phi.resize(grid.size());
  t.dphi.assign(grid.d, std::vector<double>(grid.size()));
  double x[2];
  double grad[2];
  if (grid.d == 1) {
    for (int j = 0; j < grid.M; ++j) {
      x[0] = grid.node(j);
      std::span<const double> xs(x, 1);
      t.phi[j] = phi.value(xs);
      phi.gradient(xs, std::span<double>(grad, 1));
      t.dphi[0][j] = grad[0];
    }
  } else {
    for (int j0 = 0; j0 < grid.M; ++j0)
      for (int j1 = 0; j1 < grid.M; ++j1) {
        x[0] = grid.node(j0);
        x[1] = grid.node(j1);
        std::span<const double> xs(x, 2);
        const long idx = grid.index(j0, j1);
        t.phi[idx] = phi.value(xs);
        phi.gradient(xs, std::span<double>(grad, 2));
        t.dphi[0][idx] = grad[0];
        t.dphi[1][idx] = grad[1];
      }
  }
  return t;
}

double relative_l2_error(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    num += diff * diff;
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace fluctlab::meanfield
