#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fluctlab::scenario {

/// Purpose tag baked into every derived substream seed so that streams used
/// for different roles can never collide even under identical indices.
enum class Stream : std::uint64_t {
  Init = 1,          // initial positions / eta0 draws
  Idiosyncratic = 2, // per-particle Brownian increments
  CommonNoise = 3,   // shared W path
  WhiteNoise = 4,    // space-time white forcing
  Sampling = 5,      // generic Monte-Carlo sampling (ELLN, KL, ...)
};

/// SplitMix64 finalizer; good avalanche, used only for seed derivation.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic substream seed from (master, purpose, replica, member).
/// Distinct inputs give distinct seeds with overwhelming probability and the
/// derivation is pure, so a worker pool of any width reproduces the same
/// streams.
std::uint64_t substream_seed(std::uint64_t master, Stream purpose,
                             std::uint64_t replica = 0,
                             std::uint64_t member = 0);

/// A seeded generator with an explicit Box-Muller normal so draw sequences
/// are pinned by this repo, not by the standard library's unspecified
/// std::normal_distribution algorithm.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal draw.
  double normal();

  /// Fill out with i.i.d. N(0, sd^2).
  void normal_fill(std::span<double> out, double sd);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed bookkeeping for one campaign: which substreams exist and how they
/// derive from the master seed. Echoed into run manifests.
struct RngPlan {
  std::uint64_t master = 0;
  bool shared_common_noise = false;  // one W across replicas (conditional runs)

  std::uint64_t init_seed(std::uint64_t replica) const {
    return substream_seed(master, Stream::Init, replica);
  }
  std::uint64_t idio_seed(std::uint64_t replica, std::uint64_t particle = 0) const {
    return substream_seed(master, Stream::Idiosyncratic, replica, particle);
  }
  std::uint64_t common_noise_seed(std::uint64_t replica) const {
    return substream_seed(master, Stream::CommonNoise,
                          shared_common_noise ? 0 : replica);
  }
  std::uint64_t white_noise_seed(std::uint64_t replica) const {
    return substream_seed(master, Stream::WhiteNoise, replica);
  }
  std::uint64_t sampling_seed(std::uint64_t replica, std::uint64_t member = 0) const {
    return substream_seed(master, Stream::Sampling, replica, member);
  }
};

}  // namespace fluctlab::scenario
