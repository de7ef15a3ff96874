#pragma once

#include "fluctlab/coefficients.hpp"
#include "fluctlab/densities.hpp"
#include "fluctlab/kernels.hpp"
#include "fluctlab/rng.hpp"
#include "fluctlab/test_functions.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluctlab::scenario {

/// Raised for malformed config text (bad syntax) and for violated invariants;
/// the message names the offending line or invariant.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Declarative description of one registered test function; materialized into
/// a TestFunction (with closures) on demand.
struct TestFunctionSpec {
  std::string name;
  std::string kind = "bump";  // bump | monomial
  double radius = 2.0;
  std::vector<double> center;
  double amplitude = 1.0;
  int axis = 0;   // monomial only
  int power = 1;  // monomial only

  TestFunction materialize(int d) const;
};

struct ElLnSettings {
  int samples = 100000;
  std::vector<int> N_list = {8, 16, 32, 64, 128, 256, 512, 1024};
  double phi_sup = 0.01;  // target sup-norm of the product test function
  double kappa = 0.0;     // 0 = derive from alpha (see statlab docs)
  std::vector<int> p_list = {2, 4};
};

struct IncrementSettings {
  // Lags as fractions of T; defaults are the dyadic ladder T/64 .. T/4.
  std::vector<double> lag_fractions = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8,
                                       1.0 / 4};
};

/// Fully resolved experiment description. Immutable after load; safe to share
/// across threads.
struct ScenarioConfig {
  int d = 1;
  std::vector<int> N_list = {1000};
  double T = 0.5;
  int n_steps = 100;
  double L = 8.0;
  int M = 256;
  double Xi = 64.0;  // frequency cutoff per axis
  int M_f = 1024;    // frequency lattice size per axis
  double alpha = 1.0;
  double alpha_interaction = 2.6;
  int R = 200;
  std::uint64_t seed = 1;
  int snapshot_stride = 1;

  KernelSpec kernel;
  CoefficientSpec sigma;
  CoefficientSpec nu;
  DensitySpec rho0;
  std::vector<TestFunctionSpec> phis;

  ElLnSettings elln;
  IncrementSettings increments;

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  RngPlan rng_plan() const { return RngPlan{seed}; }

  std::vector<TestFunction> test_functions() const;

  /// Deterministic JSON echo of the resolved config plus the seed plan and
  /// code version; byte-identical across loads of the same file.
  std::string manifest_json() const;
};

/// Parses the documented key-value grammar; `origin` labels error messages.
ScenarioConfig parse_config_text(const std::string& text,
                                 const std::string& origin = "<string>");

/// Reads the file, parses, validates.
ScenarioConfig load_config(const std::string& path);

}  // namespace fluctlab::scenario
