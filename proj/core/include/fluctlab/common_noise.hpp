#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fluctlab::particles {

/// Pre-drawn increments of the common Brownian motion W: n_steps x m,
/// each entry N(0, dt). One path object is shared read-only by every replica
/// of a conditional campaign and by the coupled field solvers.
struct CommonNoisePath {
  int n_steps = 0;
  int m = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> dW;  // n_steps * m, row-major

  static CommonNoisePath draw(int n_steps, int m, double dt, std::uint64_t seed);

  /// Zero path (for nu = 0 runs).
  static CommonNoisePath zero(int n_steps, int m, double dt);

  std::span<const double> increment(int step) const {
    return {dW.data() + static_cast<size_t>(step) * m, static_cast<size_t>(m)};
  }

  /// W at time step*dt (sum of the first `step` increments).
  std::vector<double> value_at(int step) const;
};

}  // namespace fluctlab::particles
