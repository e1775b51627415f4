#pragma once

#include <optional>

#include "phmm/link.hpp"
#include "phmm/stationary.hpp"
#include "phmm/types.hpp"

namespace phmm {

/// Truncated dwell-time probability mass function for one state.
///
/// pmf[r - 1] is the probability of a stay of exactly r steps, for
/// r = 1..support_max; tail_mass is 1 - sum(pmf). start_time is the cycle
/// position at which the stay begins, or empty for the overall
/// (start-time-marginalized) distribution.
struct DwellPMF {
  int state = 1;
  std::optional<int> start_time;
  int support_max = 0;
  Vector pmf;
  double tail_mass = 0.0;
};

/// Mixture weights w_i(t): the probability that a dwell in state i begins
/// at cycle position t, conditional on a dwell beginning. Sums to 1.
struct MixtureWeights {
  int state = 1;
  Vector weights;
};

/// Smallest multiple of the period whose analytic tail mass falls below
/// eps_tail, capped at 10^4. The tail decays geometrically with the
/// per-cycle factor prod_j gamma_ii(j), so the bound is computed a priori.
int default_support(const PeriodicTPM& tpm, int state, double eps_tail = 1e-12);

/// Time-varying dwell-time pmf for a stay in `state` beginning at cycle
/// position t: d(r) = (1 - gamma_ii(t+r-1)) prod_{k=1}^{r-1} gamma_ii(t+k-1).
DwellPMF dwell_pmf_at(const PeriodicTPM& tpm, int state, int t, int r_max);

/// Expected dwell time for a stay beginning at t, from the closed form
/// (L + sum_{r<=L} r d(r)) / (sum_{r<=L} d(r)) - L. Throws DivergenceError
/// when the state cannot be left within a full cycle.
double dwell_mean_at(const PeriodicTPM& tpm, int state, int t);

/// Entry-time mixture weights, proportional to
/// sum_{l != i} delta_l(t-1) gamma_li(t-1), with index 0 wrapping to L.
/// delta must be an exact_delta distribution for the same schedule.
MixtureWeights mixture_weights(const PeriodicTPM& tpm, const PeriodicDistribution& delta,
                               int state);

/// Overall dwell-time pmf: the w_i(t)-weighted mixture of the time-varying
/// distributions. Reduces to a geometric distribution when the schedule is
/// homogeneous.
DwellPMF dwell_pmf_overall(const PeriodicTPM& tpm, int state, int r_max);

/// Overall expected dwell time sum_t w_i(t) E[R_i(t)].
double dwell_mean_overall(const PeriodicTPM& tpm, int state);

/// Pr(R > s) for the time-varying (t given) or overall (t absent) dwell
/// time. The tail is evaluated analytically through the per-cycle decay
/// factor, so s may be arbitrarily large.
double survival(const PeriodicTPM& tpm, int state, std::optional<int> t, long s);

}  // namespace phmm
