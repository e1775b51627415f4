#pragma once

#include <cstdint>
#include <vector>

#include "phmm/link.hpp"
#include "phmm/types.hpp"

namespace phmm {

enum class DistributionKind { exact_delta, hypothetical_rho, empirical };

/// One probability vector over states per cycle position.
struct PeriodicDistribution {
  int period = 0;
  std::vector<Vector> probs;
  DistributionKind kind = DistributionKind::exact_delta;

  const Vector& at(long long t) const { return probs[cyclic_index(t, period) - 1]; }
};

/// Transition matrix of the thinned chain observed every L steps:
/// matrix = G(t) G(t+1) ... G(t+L-1).
struct ThinnedTPM {
  int anchor = 1;
  Matrix matrix;
};

enum class StationaryMethod {
  recursive,  ///< one linear solve, then delta(t+1) = delta(t) G(t)
  direct      ///< an independent linear solve at every t (test oracle path)
};

/// Strong connectivity of the graph with edges {m(i,j) > eps}.
bool is_irreducible(const Matrix& m, double eps = 1e-12);

/// Stationary vector of a single stochastic matrix: solves x = x G with
/// sum(x) = 1 via the replace-one-equation normalization x (I - G + U) = 1.
Vector stationary_vector(const Matrix& g);

/// Cyclic product of the L matrices starting at t (1 <= t <= L).
ThinnedTPM thinned_tpm(const PeriodicTPM& tpm, int t);

/// Exact periodically stationary distribution delta(t). Throws ModelError
/// when the thinned chain is reducible (no unique stationary distribution).
PeriodicDistribution stationary_exact(const PeriodicTPM& tpm,
                                      StationaryMethod method = StationaryMethod::recursive);

/// Hypothetical stationary distribution rho(t): for each t the stationary
/// vector of G(t) held constant. This is the biased approximation; it is
/// exposed for comparison against delta(t).
PeriodicDistribution stationary_hypothetical(const PeriodicTPM& tpm);

/// Relative state frequencies at each cycle position from one simulated
/// realization of n_cycles full cycles, started from delta at position 1.
/// Deterministic given the seed.
PeriodicDistribution empirical_state_frequencies(const PeriodicTPM& tpm, long n_cycles,
                                                 std::uint64_t seed);

}  // namespace phmm
