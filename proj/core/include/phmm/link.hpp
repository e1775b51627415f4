#pragma once

#include <vector>

#include "phmm/types.hpp"

namespace phmm {

/// Trigonometric multinomial-logit specification of a periodic transition
/// probability matrix.
///
/// Each ordered off-diagonal state pair (i, j) carries a coefficient vector
/// (b0, b1_1..b1_K, b2_1..b2_K). The linear predictor at cycle position t is
///
///   eta_ij(t) = b0 + sum_k b1_k sin(2 pi k t / L) + sum_k b2_k cos(2 pi k t / L)
///
/// and row i of the matrix is the multinomial logit with the diagonal
/// (staying) entry as the reference category. For two states this reduces to
/// gamma_ij(t) = logistic(eta_ij(t)).
struct TrigLinkSpec {
  int n_states = 2;
  int period = 24;
  int n_harmonics = 1;
  /// One coefficient vector per ordered pair (i, j), i != j, in row-major
  /// order: (1,2), (1,3), ..., (2,1), (2,3), ...
  std::vector<Vector> coeffs;

  /// All-zero coefficients for the given dimensions.
  TrigLinkSpec(int n_states_, int period_, int n_harmonics_);
  TrigLinkSpec() = default;

  /// Convenience constructor for the common two-state case.
  static TrigLinkSpec two_state(int period, int n_harmonics, const Vector& beta_12,
                                const Vector& beta_21);

  int n_pairs() const { return n_states * (n_states - 1); }
  int coeff_length() const { return 1 + 2 * n_harmonics; }

  /// Position of pair (i, j) in coeffs (states 1-based, i != j).
  int pair_index(int i, int j) const;

  Vector& coeff(int i, int j) { return coeffs[pair_index(i, j)]; }
  const Vector& coeff(int i, int j) const { return coeffs[pair_index(i, j)]; }

  /// Throws ArgumentError if dimensions or coefficient values are invalid.
  void validate() const;
};

/// The L unique stochastic matrices of a periodically inhomogeneous chain.
/// Entry (i-1, j-1) of at(t) is the probability of moving from state i to
/// state j between cycle positions t and t+1. Access is cyclic: at(t) and
/// at(t + period) are the same object.
class PeriodicTPM {
 public:
  /// Validates row-stochasticity (1e-12) and entry bounds on construction.
  explicit PeriodicTPM(std::vector<Matrix> matrices);

  int period() const { return static_cast<int>(matrices_.size()); }
  int n_states() const { return static_cast<int>(matrices_.front().rows()); }

  const Matrix& at(long long t) const {
    return matrices_[cyclic_index(t, period()) - 1];
  }

  /// Diagonal entry gamma_ii at cycle position t (state 1-based).
  double staying(long long t, int state) const {
    return at(t)(state - 1, state - 1);
  }

  const std::vector<Matrix>& matrices() const { return matrices_; }

 private:
  std::vector<Matrix> matrices_;
};

/// Linear predictor eta_ij(t) for 1 <= t <= period, i != j.
double linear_predictor(const TrigLinkSpec& spec, int i, int j, int t);

/// Builds the full periodic schedule from the link specification. Linear
/// predictors are clamped to [-709, 709] before exponentiation, and each row
/// is computed as a max-shifted softmax over {0, eta_ij : j != i}.
PeriodicTPM build_tpm(const TrigLinkSpec& spec);

}  // namespace phmm
