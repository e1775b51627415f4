#include "phmm/dwell.hpp"

#include <cmath>
#include <string>

#include "phmm/error.hpp"

namespace phmm {

namespace {

constexpr int kSupportCap = 10000;

void check_state(const PeriodicTPM& tpm, int state) {
  if (state < 1 || state > tpm.n_states())
    throw ArgumentError("dwell: state must be in 1.." + std::to_string(tpm.n_states()));
}

void check_start(const PeriodicTPM& tpm, int t) {
  if (t < 1 || t > tpm.period())
    throw ArgumentError("dwell: t must be in 1.." + std::to_string(tpm.period()));
}

// Product of the diagonal entries gamma_ii over one full cycle. The same
// set of factors appears for every anchor, so the value is anchor-free.
double cycle_staying_factor(const PeriodicTPM& tpm, int state) {
  double prod = 1.0;
  for (int j = 1; j <= tpm.period(); ++j) prod *= tpm.staying(j, state);
  return prod;
}

// First L values of the time-varying pmf, via one running product.
Vector pmf_first_cycle(const PeriodicTPM& tpm, int state, int t) {
  const int L = tpm.period();
  Vector d(L);
  double prod = 1.0;
  for (int r = 1; r <= L; ++r) {
    double g = tpm.staying(t + r - 1, state);
    d[r - 1] = (1.0 - g) * prod;
    prod *= g;
  }
  return d;
}

double mean_from_first_cycle(const Vector& d, int L) {
  double sum_d = 0.0;
  double sum_rd = 0.0;
  for (int r = 1; r <= L; ++r) {
    sum_d += d[r - 1];
    sum_rd += r * d[r - 1];
  }
  if (!(sum_d > 0.0))
    throw DivergenceError(
        "dwell_mean: state is never left within a full cycle; "
        "expected dwell time is infinite");
  return (L + sum_rd) / sum_d - L;
}

}  // namespace

int default_support(const PeriodicTPM& tpm, int state, double eps_tail) {
  check_state(tpm, state);
  const int L = tpm.period();
  double decay = cycle_staying_factor(tpm, state);
  if (decay <= 0.0) return L;
  if (decay >= 1.0) return kSupportCap;
  long cycles = static_cast<long>(std::ceil(std::log(eps_tail) / std::log(decay)));
  if (cycles < 1) cycles = 1;
  long r_max = cycles * static_cast<long>(L);
  return static_cast<int>(std::min<long>(r_max, kSupportCap));
}

DwellPMF dwell_pmf_at(const PeriodicTPM& tpm, int state, int t, int r_max) {
  check_state(tpm, state);
  check_start(tpm, t);
  if (r_max < 1) throw ArgumentError("dwell_pmf_at: r_max must be >= 1");

  DwellPMF out;
  out.state = state;
  out.start_time = t;
  out.support_max = r_max;
  out.pmf.resize(r_max);
  double prod = 1.0;
  double total = 0.0;
  for (int r = 1; r <= r_max; ++r) {
    double g = tpm.staying(t + r - 1, state);
    out.pmf[r - 1] = (1.0 - g) * prod;
    total += out.pmf[r - 1];
    prod *= g;
  }
  out.tail_mass = 1.0 - total;
  return out;
}

double dwell_mean_at(const PeriodicTPM& tpm, int state, int t) {
  check_state(tpm, state);
  check_start(tpm, t);
  return mean_from_first_cycle(pmf_first_cycle(tpm, state, t), tpm.period());
}

MixtureWeights mixture_weights(const PeriodicTPM& tpm, const PeriodicDistribution& delta,
                               int state) {
  check_state(tpm, state);
  if (delta.kind != DistributionKind::exact_delta)
    throw ArgumentError("mixture_weights: delta must be an exact_delta distribution");
  if (delta.period != tpm.period())
    throw ArgumentError("mixture_weights: period mismatch between delta and schedule");

  const int L = tpm.period();
  const int N = tpm.n_states();
  MixtureWeights out;
  out.state = state;
  out.weights.resize(L);
  double total = 0.0;
  for (int t = 1; t <= L; ++t) {
    // Convention: Gamma(0) = Gamma(L), delta(0) = delta(L).
    const Vector& d_prev = delta.at(t - 1 + L);
    const Matrix& g_prev = tpm.at(t - 1 + L);
    double entry = 0.0;
    for (int l = 1; l <= N; ++l) {
      if (l == state) continue;
      entry += d_prev[l - 1] * g_prev(l - 1, state - 1);
    }
    out.weights[t - 1] = entry;
    total += entry;
  }
  if (!(total > 0.0))
    throw ModelError("mixture_weights: state " + std::to_string(state) +
                     " is never entered");
  out.weights /= total;
  return out;
}

DwellPMF dwell_pmf_overall(const PeriodicTPM& tpm, int state, int r_max) {
  check_state(tpm, state);
  if (r_max < 1) throw ArgumentError("dwell_pmf_overall: r_max must be >= 1");

  PeriodicDistribution delta = stationary_exact(tpm);
  MixtureWeights w = mixture_weights(tpm, delta, state);

  const int L = tpm.period();
  DwellPMF out;
  out.state = state;
  out.support_max = r_max;
  out.pmf = Vector::Zero(r_max);

  // One pass over r for all start times at once, each with its own running
  // product, so every staying factor is computed exactly once per (t, r).
  Vector prod = Vector::Ones(L);
  for (int r = 1; r <= r_max; ++r) {
    double mass = 0.0;
    for (int t = 1; t <= L; ++t) {
      double g = tpm.staying(t + r - 1, state);
      mass += w.weights[t - 1] * (1.0 - g) * prod[t - 1];
      prod[t - 1] *= g;
    }
    out.pmf[r - 1] = mass;
  }
  out.tail_mass = 1.0 - out.pmf.sum();
  return out;
}

double dwell_mean_overall(const PeriodicTPM& tpm, int state) {
  check_state(tpm, state);
  PeriodicDistribution delta = stationary_exact(tpm);
  MixtureWeights w = mixture_weights(tpm, delta, state);
  const int L = tpm.period();
  double mean = 0.0;
  for (int t = 1; t <= L; ++t)
    mean += w.weights[t - 1] * mean_from_first_cycle(pmf_first_cycle(tpm, state, t), L);
  return mean;
}

double survival(const PeriodicTPM& tpm, int state, std::optional<int> t, long s) {
  check_state(tpm, state);
  if (s < 0) throw ArgumentError("survival: s must be >= 0");
  if (t) check_start(tpm, *t);
  if (s == 0) return 1.0;

  const int L = tpm.period();
  const long q = s / L;
  const int rem = static_cast<int>(s % L);
  const double decay = cycle_staying_factor(tpm, state);

  auto survival_from = [&](int start) {
    double p = q > 0 ? std::pow(decay, static_cast<double>(q)) : 1.0;
    for (int j = 1; j <= rem; ++j) p *= tpm.staying(start + j - 1, state);
    return p;
  };

  if (t) return survival_from(*t);

  PeriodicDistribution delta = stationary_exact(tpm);
  MixtureWeights w = mixture_weights(tpm, delta, state);
  double total = 0.0;
  for (int start = 1; start <= L; ++start)
    total += w.weights[start - 1] * survival_from(start);
  return total;
}

}  // namespace phmm
