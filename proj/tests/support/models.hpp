// Reference two-state models with trigonometric transition schedules used
// across the tests, plus emission settings paired with them for full-HMM
// scenarios.
#pragma once

#include "phmm/emissions.hpp"
#include "phmm/link.hpp"
#include "phmm/model.hpp"

namespace models {

inline phmm::Vector vec(std::initializer_list<double> values) {
  phmm::Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

// Daily cycle, one harmonic: a chain with pronounced but balanced
// time-of-day variation.
inline phmm::TrigLinkSpec scenario1() {
  return phmm::TrigLinkSpec::two_state(24, 1, vec({-2, -1, -1}), vec({-2, 2, 2}));
}

// Nearly homogeneous chain whose per-time stationary vectors swing wildly;
// the canonical demonstration that the hypothetical distribution is biased.
inline phmm::TrigLinkSpec scenario2() {
  return phmm::TrigLinkSpec::two_state(24, 1, vec({-5, -1, -1}), vec({-5, 1, 1}));
}

// Two harmonics.
inline phmm::TrigLinkSpec scenario3() {
  return phmm::TrigLinkSpec::two_state(24, 2, vec({-3, -0.5, -1, 1, -2}),
                                       vec({-3, -0.5, 2, 0.5, -0.5}));
}

// Moderate switching rates; the recovery-study truth.
inline phmm::TrigLinkSpec recovery_link() {
  return phmm::TrigLinkSpec::two_state(24, 1, vec({-1.2, 0.85, 0.15}),
                                       vec({-1.5, -0.7, -1.3}));
}

// Strongly persistent states with markedly non-geometric dwell times.
inline phmm::TrigLinkSpec persistent_link() {
  return phmm::TrigLinkSpec::two_state(24, 1, vec({-3, 1.5, -0.9}),
                                       vec({-3, 1.2, -1.1}));
}

// Well-separated negative binomial activity levels.
inline phmm::EmissionSpec count_emissions() {
  return phmm::EmissionSpec(phmm::EmissionFamily::negative_binomial, vec({4, 30}),
                            vec({1.5, 4}));
}

inline phmm::HMMModel recovery_model() {
  return phmm::HMMModel(recovery_link(), count_emissions());
}

inline phmm::HMMModel persistent_model() {
  return phmm::HMMModel(persistent_link(), count_emissions());
}

}  // namespace models
