#pragma once

#include <Eigen/Dense>

namespace phmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Maps any integer time index onto the canonical range {1, ..., period}.
/// Indices are 1-based throughout the library, so t and t + period refer
/// to the same cycle position.
inline int cyclic_index(long long t, int period) {
  long long m = (t - 1) % period;
  if (m < 0) m += period;
  return static_cast<int>(m) + 1;
}

/// Kahan-compensated accumulator. Long log-likelihood recursions sum one
/// term per observation; plain accumulation leaves an error that grows with
/// the series length and puts a noise floor under finite-difference
/// gradients of the result.
class KahanSum {
 public:
  void add(double term) {
    double y = term - compensation_;
    double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace phmm
