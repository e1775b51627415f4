#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phmm/dwell.hpp"
#include "phmm/hmm.hpp"
#include "phmm/model.hpp"
#include "phmm/optim.hpp"

namespace phmm {

/// Index layout of the unconstrained working parameter vector:
/// one block of link coefficients per condition (pairs in row-major order,
/// each of length 1 + 2K), followed by log means and, for the negative
/// binomial family, log dispersions.
struct WorkingLayout {
  int n_states = 2;
  int period = 24;
  int n_harmonics = 1;
  int n_conditions = 1;
  EmissionFamily family = EmissionFamily::negative_binomial;

  static WorkingLayout from_model(const HMMModel& model);

  int coeff_length() const { return 1 + 2 * n_harmonics; }
  int n_pairs() const { return n_states * (n_states - 1); }
  int beta_block_size() const { return n_pairs() * coeff_length(); }
  int beta_offset(int condition) const { return condition * beta_block_size(); }
  int mu_offset() const { return n_conditions * beta_block_size(); }
  int phi_offset() const { return mu_offset() + n_states; }
  int size() const {
    return mu_offset() + n_states +
           (family == EmissionFamily::negative_binomial ? n_states : 0);
  }

  /// Link spec for one condition block, with linear predictors untouched.
  TrigLinkSpec link_at(const Vector& working, int condition) const;
};

/// Maps a model to its working parameters. The model's state processes must
/// all be trigonometric links.
Vector to_working(const HMMModel& model);

/// Inverse map. States are relabeled so emission means ascend; the label
/// convention makes the round trip with to_working the identity on valid
/// models.
HMMModel from_working(const Vector& working, const HMMModel& templ);

/// Permutes the working vector so emission means ascend; resolves label
/// switching after a fit.
Vector relabel_working(const Vector& working, const WorkingLayout& layout);

struct FitOptions {
  int max_iterations = 500;
  double grad_tol = 1e-4;
  /// Optional working-scale start (overrides the default recipe).
  std::optional<Vector> start;
};

struct Convergence {
  bool converged = false;
  int iterations = 0;
  double grad_max_norm = 0.0;
};

struct FitResult {
  HMMModel model;
  double log_likelihood = 0.0;
  /// Second derivatives of the negative log-likelihood at the optimum,
  /// working scale.
  Matrix hessian;
  Convergence convergence;
};

/// Maximum-likelihood fit by BFGS over the working parameters with
/// central-difference gradients. The default start has beta_0 = -2 for every
/// off-diagonal pair, other coefficients zero, emission means at the evenly
/// spaced data quantiles ((2k - 1) / 2N), and unit dispersions.
FitResult fit(const std::vector<ObservationSeries>& data, const HMMModel& templ,
              const FitOptions& options = {});

enum class Functional { delta_t, rho_t, dwell_mean_t, dwell_pmf_overall };

/// One grid point of a confidence band. For delta_t and rho_t the grid runs
/// over (t, state); for dwell_mean_t over t; for dwell_pmf_overall over r
/// (index stores r and state the chosen state).
struct BandPoint {
  int index = 0;
  int state = 0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Monte Carlo confidence bands from the normal approximation of the MLE:
/// draws working-parameter vectors from N(theta_hat, H^-1), pushes each
/// through the functional, and reports pointwise empirical quantiles at
/// (1 -/+ level) / 2. Throws UncertaintyError when the Hessian is not
/// positive definite.
std::vector<BandPoint> mc_confidence(const FitResult& fit, Functional functional,
                                     int n_draws, double level, std::uint64_t seed,
                                     int state = 1, int condition = 0, int r_max = 0);

}  // namespace phmm
