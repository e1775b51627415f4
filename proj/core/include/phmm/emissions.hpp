#pragma once

#include "phmm/rng.hpp"
#include "phmm/types.hpp"

namespace phmm {

enum class EmissionFamily { negative_binomial, poisson };

/// log pmf of the negative binomial with mean mu and dispersion phi
/// (variance mu + mu^2 / phi). Approaches the Poisson pmf as phi grows.
double neg_binomial_log_pmf(long x, double mu, double phi);

double poisson_log_pmf(long x, double lambda);

/// Per-state count distributions. State means must be finite, positive and
/// non-decreasing (the label convention: low states have low means).
class EmissionSpec {
 public:
  EmissionSpec(EmissionFamily family, Vector means, Vector dispersions = Vector());

  EmissionFamily family() const { return family_; }
  int n_states() const { return static_cast<int>(means_.size()); }
  const Vector& means() const { return means_; }
  const Vector& dispersions() const { return dispersions_; }

  double log_pmf(int state, long count) const;  // state 1-based
  long sample(int state, Rng& rng) const;

 private:
  EmissionFamily family_;
  Vector means_;
  Vector dispersions_;
};

}  // namespace phmm
