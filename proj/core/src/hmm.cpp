#include "phmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phmm/error.hpp"
#include "phmm/parallel.hpp"
#include "phmm/rng.hpp"

namespace phmm {

namespace {

// Per-step emission weights, shifted so the largest is 1. Missing
// observations contribute a flat weight of 1 and a zero shift. Shifts are
// added back to the accumulated log-normalizers, which keeps the recursion
// finite even when every state assigns tiny probability to an observation.
struct EmissionWeights {
  Matrix weights;  // T x N
  Vector shifts;   // T
};

EmissionWeights emission_weights(const HMMModel& model, const ObservationSeries& s) {
  const int N = model.n_states();
  const auto T = static_cast<Eigen::Index>(s.values.size());
  EmissionWeights out;
  out.weights.resize(T, N);
  out.shifts.resize(T);

  // Counts are small integers; cache log-pmfs per distinct value.
  long max_count = -1;
  for (const auto& v : s.values)
    if (v) max_count = std::max(max_count, *v);
  Matrix table(N, max_count + 1);
  for (int i = 1; i <= N; ++i)
    for (long x = 0; x <= max_count; ++x)
      table(i - 1, x) = model.emissions().log_pmf(i, x);

  for (Eigen::Index tau = 0; tau < T; ++tau) {
    if (!s.values[tau]) {
      out.weights.row(tau).setOnes();
      out.shifts[tau] = 0.0;
      continue;
    }
    long x = *s.values[tau];
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) m = std::max(m, table(i, x));
    if (!std::isfinite(m))
      throw NumericError("log_likelihood: zero emission probability at step " +
                         std::to_string(tau + 1) + " of series '" + s.id + "'");
    for (int i = 0; i < N; ++i) out.weights(tau, i) = std::exp(table(i, x) - m);
    out.shifts[tau] = m;
  }
  return out;
}

struct ForwardResult {
  double log_likelihood;
  Matrix alpha;       // T x N, normalized forward vectors
  Vector normalizers; // T, linear-scale per-step normalizers
};

ForwardResult forward(const HMMModel& model, const ObservationSeries& s,
                      const EmissionWeights& ew, bool keep_path) {
  const auto& tpm = model.tpm(s.condition);
  const int L = tpm.period();
  const auto T = static_cast<Eigen::Index>(s.values.size());
  const int N = model.n_states();

  ForwardResult out;
  KahanSum loglik;
  if (keep_path) {
    out.alpha.resize(T, N);
    out.normalizers.resize(T);
  }

  Eigen::RowVectorXd v = model.initial_distribution(s.start_phase, s.condition).transpose();
  v = v.cwiseProduct(ew.weights.row(0));
  double c = v.sum();
  if (!(c > 0.0) || !std::isfinite(c))
    throw NumericError("log_likelihood: non-finite forward value at step 1 of series '" +
                       s.id + "'");
  loglik.add(std::log(c) + ew.shifts[0]);
  v /= c;
  if (keep_path) {
    out.alpha.row(0) = v;
    out.normalizers[0] = c;
  }

  for (Eigen::Index tau = 2; tau <= T; ++tau) {
    int phase = cyclic_index(s.start_phase + tau - 2, L);
    v = (v * tpm.at(phase)).cwiseProduct(ew.weights.row(tau - 1));
    c = v.sum();
    if (!(c > 0.0) || !std::isfinite(c))
      throw NumericError("log_likelihood: non-finite forward value at step " +
                         std::to_string(tau) + " of series '" + s.id + "'");
    loglik.add(std::log(c) + ew.shifts[tau - 1]);
    v /= c;
    if (keep_path) {
      out.alpha.row(tau - 1) = v;
      out.normalizers[tau - 1] = c;
    }
  }
  out.log_likelihood = loglik.value();
  return out;
}

double series_log_likelihood(const HMMModel& model, const ObservationSeries& s) {
  s.validate(model.period(), model.n_conditions());
  EmissionWeights ew = emission_weights(model, s);
  return forward(model, s, ew, false).log_likelihood;
}

}  // namespace

double log_likelihood(const HMMModel& model, const std::vector<ObservationSeries>& series) {
  if (series.empty()) throw ArgumentError("log_likelihood: no series given");

  std::vector<double> per_series(series.size());
  parallel_for(static_cast<int>(series.size()),
               [&](int k) { per_series[k] = series_log_likelihood(model, series[k]); });

  // Deterministic reduction order: sort by id, stable on ties.
  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return series[a].id < series[b].id; });
  double total = 0.0;
  for (std::size_t k : order) total += per_series[k];
  return total;
}

Matrix local_decode(const HMMModel& model, const ObservationSeries& series) {
  series.validate(model.period(), model.n_conditions());
  EmissionWeights ew = emission_weights(model, series);
  ForwardResult fwd = forward(model, series, ew, true);

  const auto& tpm = model.tpm(series.condition);
  const int L = tpm.period();
  const auto T = static_cast<Eigen::Index>(series.values.size());
  const int N = model.n_states();

  Matrix posterior(T, N);
  Eigen::VectorXd beta = Eigen::VectorXd::Ones(N);
  posterior.row(T - 1) = fwd.alpha.row(T - 1);
  for (Eigen::Index tau = T - 1; tau >= 1; --tau) {
    int phase = cyclic_index(series.start_phase + tau - 1, L);
    Eigen::VectorXd weighted = ew.weights.row(tau).transpose().cwiseProduct(beta);
    beta = (tpm.at(phase) * weighted) / fwd.normalizers[tau];
    posterior.row(tau - 1) = fwd.alpha.row(tau - 1).cwiseProduct(beta.transpose());
  }
  for (Eigen::Index tau = 0; tau < T; ++tau) {
    double sum = posterior.row(tau).sum();
    if (!(sum > 0.0) || !std::isfinite(sum))
      throw NumericError("local_decode: non-finite posterior at step " +
                         std::to_string(tau + 1));
    posterior.row(tau) /= sum;
  }
  return posterior;
}

SimulatedSeries simulate(const HMMModel& model, long n_obs, int start_phase,
                         std::uint64_t seed, const std::string& id, int condition) {
  if (n_obs < 1) throw ArgumentError("simulate: n_obs must be >= 1");
  const auto& tpm = model.tpm(condition);
  const int L = tpm.period();
  if (start_phase < 1 || start_phase > L)
    throw ArgumentError("simulate: start_phase must be in 1.." + std::to_string(L));

  Rng rng(seed);
  SimulatedSeries out;
  out.states.reserve(n_obs);
  out.series.id = id;
  out.series.start_phase = start_phase;
  out.series.condition = condition;
  out.series.values.reserve(n_obs);

  int state = rng.categorical(model.initial_distribution(start_phase, condition));
  for (long tau = 1; tau <= n_obs; ++tau) {
    out.states.push_back(state + 1);
    out.series.values.push_back(model.emissions().sample(state + 1, rng));
    if (tau < n_obs) {
      int phase = cyclic_index(start_phase + tau - 1, L);
      state = rng.categorical(tpm.at(phase).row(state).transpose());
    }
  }
  return out;
}

}  // namespace phmm
