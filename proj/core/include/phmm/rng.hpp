#pragma once

#include <cstdint>
#include <random>

#include "phmm/types.hpp"

namespace phmm {

/// Deterministic random source with substream support.
///
/// The engine is a std::mt19937_64 whose seeding and raw output are fully
/// specified by the standard, and all samplers are built on top of the raw
/// 64-bit stream, so results are reproducible across platforms and
/// standard-library versions. Substreams derived from the same seed with
/// distinct stream ids are statistically independent, which lets callers
/// fan work out across threads without changing the sampled values.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t raw() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1].
  double uniform_open();

  /// Standard normal (Box-Muller, one spare cached).
  double normal();

  /// Gamma with given shape and scale (Marsaglia-Tsang).
  double gamma(double shape, double scale);

  /// Poisson by counting unit-exponential arrivals; cost is O(mean).
  long poisson(double mean);

  /// Index drawn from a probability vector (0-based).
  int categorical(const Vector& probs);

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace phmm
