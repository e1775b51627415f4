#pragma once

#include <cstdint>
#include <vector>

#include "phmm/dwell.hpp"
#include "phmm/hmm.hpp"

namespace phmm {

/// Draws n_seq state sequences, each position sampled independently from the
/// local posterior row at that step. Deterministic given the seed; sequences
/// use 1-based state labels.
std::vector<std::vector<int>> sample_decoded_sequences(const HMMModel& model,
                                                       const ObservationSeries& series,
                                                       int n_seq, std::uint64_t seed);

/// Empirical dwell-time frequencies from run-length encoding. The first and
/// last run of every sequence are censored (their true lengths are
/// unobserved) and excluded. Frequencies are relative to all complete runs
/// of the state, so runs longer than r_max leave mass missing and the pmf
/// sums to at most 1. Frequencies are averaged across the sequences in
/// which the state completes at least one run.
struct EmpiricalDwell {
  int state = 1;
  Vector pmf;
  int n_sequences = 0;
};

EmpiricalDwell empirical_dwell(const std::vector<std::vector<int>>& sequences, int state,
                               int r_max);

/// Pairwise comparison of an analytic and an empirical dwell distribution on
/// the same truncated support.
struct DwellComparison {
  int state = 1;
  int r_max = 0;
  Vector analytic;
  Vector empirical;
  Vector difference;     // analytic - empirical
  double tv_distance = 0.0;  // 0.5 * sum |analytic - empirical| on 1..r_max
};

DwellComparison compare_dwell(const DwellPMF& analytic, const EmpiricalDwell& empirical);

}  // namespace phmm
