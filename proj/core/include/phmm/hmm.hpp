#pragma once

#include <cstdint>
#include <vector>

#include "phmm/model.hpp"

namespace phmm {

/// Joint log-likelihood over a set of series: the sum of the per-series
/// forward-algorithm log-likelihoods, accumulated in order of series id so
/// the result does not depend on input order. The forward recursion is
/// normalized at every step, so sequences of a million observations do not
/// underflow. The transition matrix applied between observations tau and
/// tau + 1 is the one at cycle position start_phase + tau - 1.
double log_likelihood(const HMMModel& model, const std::vector<ObservationSeries>& series);

/// Local decoding: row tau holds Pr(S_tau = i | X_1..X_T); rows sum to 1.
Matrix local_decode(const HMMModel& model, const ObservationSeries& series);

struct SimulatedSeries {
  std::vector<int> states;  // 1-based
  ObservationSeries series;
};

/// Simulates states from the periodic chain (started from the model's
/// initial distribution at start_phase) and counts from the state-dependent
/// distributions. Deterministic given the seed.
SimulatedSeries simulate(const HMMModel& model, long n_obs, int start_phase,
                         std::uint64_t seed, const std::string& id = "sim",
                         int condition = 0);

}  // namespace phmm
