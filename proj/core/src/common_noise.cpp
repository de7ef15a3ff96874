#include "fluctlab/common_noise.hpp"

#include "fluctlab/rng.hpp"

#include <cassert>
#include <cmath>

namespace fluctlab::particles {

CommonNoisePath CommonNoisePath::draw(int n_steps, int m, double dt,
                                      std::uint64_t seed) {
  assert(n_steps >= 0 && m >= 1 && dt > 0.0);
  CommonNoisePath path;
  path.n_steps = n_steps;
  path.m = m;
  path.dt = dt;
  path.seed = seed;
  path.dW.resize(static_cast<size_t>(n_steps) * m);
  scenario::GaussianStream stream(seed);
  stream.normal_fill(path.dW, std::sqrt(dt));
  return path;
}

CommonNoisePath CommonNoisePath::zero(int n_steps, int m, double dt) {
  CommonNoisePath path;
  path.n_steps = n_steps;
  path.m = m;
  path.dt = dt;
  path.dW.assign(static_cast<size_t>(n_steps) * m, 0.0);
  return path;
}

std::vector<double> CommonNoisePath::value_at(int step) const {
  assert(step >= 0 && step <= n_steps);
  std::vector<double> w(m, 0.0);
  for (int s = 0; s < step; ++s)
    for (int l = 0; l < m; ++l) w[l] += dW[static_cast<size_t>(s) * m + l];
  return w;
}

}  // namespace fluctlab::particles
