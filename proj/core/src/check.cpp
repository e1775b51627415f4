#include "phmm/check.hpp"

#include <string>

#include "phmm/error.hpp"
#include "phmm/parallel.hpp"
#include "phmm/rng.hpp"

namespace phmm {

std::vector<std::vector<int>> sample_decoded_sequences(const HMMModel& model,
                                                       const ObservationSeries& series,
                                                       int n_seq, std::uint64_t seed) {
  if (n_seq < 1) throw ArgumentError("sample_decoded_sequences: n_seq must be >= 1");
  Matrix posterior = local_decode(model, series);
  const auto T = posterior.rows();

  std::vector<std::vector<int>> sequences(n_seq);
  parallel_for(n_seq, [&](int q) {
    Rng rng(seed, static_cast<std::uint64_t>(q));
    std::vector<int>& seq = sequences[q];
    seq.resize(T);
    for (Eigen::Index tau = 0; tau < T; ++tau)
      seq[tau] = rng.categorical(posterior.row(tau).transpose()) + 1;
  });
  return sequences;
}

EmpiricalDwell empirical_dwell(const std::vector<std::vector<int>>& sequences, int state,
                               int r_max) {
  if (sequences.empty()) throw ArgumentError("empirical_dwell: no sequences");
  if (r_max < 1) throw ArgumentError("empirical_dwell: r_max must be >= 1");

  EmpiricalDwell out;
  out.state = state;
  out.pmf = Vector::Zero(r_max);

  for (const auto& seq : sequences) {
    // Run-length encode, then drop the censored first and last runs.
    std::vector<std::pair<int, long>> runs;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (!runs.empty() && runs.back().first == seq[k])
        ++runs.back().second;
      else
        runs.emplace_back(seq[k], 1);
    }
    if (runs.size() <= 2) continue;

    long n_runs = 0;
    Vector freq = Vector::Zero(r_max);
    for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
      if (runs[k].first != state) continue;
      ++n_runs;
      if (runs[k].second <= r_max) freq[runs[k].second - 1] += 1.0;
    }
    if (n_runs == 0) continue;
    out.pmf += freq / static_cast<double>(n_runs);
    ++out.n_sequences;
  }

  if (out.n_sequences == 0)
    throw CheckError("empirical_dwell: state " + std::to_string(state) +
                     " completes no dwell in any sequence");
  out.pmf /= static_cast<double>(out.n_sequences);
  return out;
}

DwellComparison compare_dwell(const DwellPMF& analytic, const EmpiricalDwell& empirical) {
  if (analytic.state != empirical.state)
    throw ArgumentError("compare_dwell: state mismatch");
  if (analytic.support_max != empirical.pmf.size())
    throw ArgumentError("compare_dwell: support mismatch");

  DwellComparison out;
  out.state = analytic.state;
  out.r_max = analytic.support_max;
  out.analytic = analytic.pmf;
  out.empirical = empirical.pmf;
  out.difference = analytic.pmf - empirical.pmf;
  out.tv_distance = 0.5 * out.difference.cwiseAbs().sum();
  return out;
}

}  // namespace phmm
