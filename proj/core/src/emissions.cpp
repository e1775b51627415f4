#include "phmm/emissions.hpp"

#include <cmath>
#include <string>

#include "phmm/error.hpp"

namespace phmm {

double neg_binomial_log_pmf(long x, double mu, double phi) {
  if (x < 0) return -std::numeric_limits<double>::infinity();
  return std::lgamma(x + phi) - std::lgamma(phi) - std::lgamma(x + 1.0) +
         phi * (std::log(phi) - std::log(phi + mu)) +
         x * (std::log(mu) - std::log(phi + mu));
}

double poisson_log_pmf(long x, double lambda) {
  if (x < 0) return -std::numeric_limits<double>::infinity();
  return x * std::log(lambda) - lambda - std::lgamma(x + 1.0);
}

EmissionSpec::EmissionSpec(EmissionFamily family, Vector means, Vector dispersions)
    : family_(family), means_(std::move(means)), dispersions_(std::move(dispersions)) {
  if (means_.size() < 1) throw ArgumentError("EmissionSpec: need at least one state");
  for (Eigen::Index i = 0; i < means_.size(); ++i) {
    if (!(means_[i] > 0.0) || !std::isfinite(means_[i]))
      throw ArgumentError("EmissionSpec: means must be positive and finite");
    if (i > 0 && means_[i] < means_[i - 1])
      throw ArgumentError("EmissionSpec: state means must be sorted ascending");
  }
  if (family_ == EmissionFamily::negative_binomial) {
    if (dispersions_.size() != means_.size())
      throw ArgumentError("EmissionSpec: one dispersion per state required");
    for (Eigen::Index i = 0; i < dispersions_.size(); ++i)
      if (!(dispersions_[i] > 0.0) || !std::isfinite(dispersions_[i]))
        throw ArgumentError("EmissionSpec: dispersions must be positive and finite");
  } else if (dispersions_.size() != 0) {
    throw ArgumentError("EmissionSpec: poisson family takes no dispersions");
  }
}

double EmissionSpec::log_pmf(int state, long count) const {
  if (state < 1 || state > n_states())
    throw ArgumentError("EmissionSpec: state index out of range");
  if (family_ == EmissionFamily::negative_binomial)
    return neg_binomial_log_pmf(count, means_[state - 1], dispersions_[state - 1]);
  return poisson_log_pmf(count, means_[state - 1]);
}

long EmissionSpec::sample(int state, Rng& rng) const {
  if (state < 1 || state > n_states())
    throw ArgumentError("EmissionSpec: state index out of range");
  if (family_ == EmissionFamily::negative_binomial) {
    // Gamma-Poisson mixture.
    double phi = dispersions_[state - 1];
    double rate = rng.gamma(phi, means_[state - 1] / phi);
    return rng.poisson(rate);
  }
  return rng.poisson(means_[state - 1]);
}

}  // namespace phmm
