#pragma once

#include <functional>

#include "phmm/types.hpp"

namespace phmm {

using Objective = std::function<double(const Vector&)>;

struct OptimOptions {
  int max_iterations = 500;
  /// Convergence requires max|gradient| below this.
  double grad_tol = 1e-4;
  /// Relative step size for central-difference gradients.
  double fd_rel_step = 1e-6;
  /// Once the gradient max-norm falls below this, finish with damped Newton
  /// steps on the finite-difference Hessian; quasi-Newton progress becomes
  /// noise-limited near the optimum.
  double polish_threshold = 1e-2;
  int max_polish_iterations = 15;
};

struct OptimResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  bool converged = false;
};

/// Central-difference gradient with per-coordinate step
/// rel_step * max(1, |x_i|).
Vector fd_gradient(const Objective& f, const Vector& x, double rel_step = 1e-6);

/// Central second differences; returns a symmetric matrix.
Matrix fd_hessian(const Objective& f, const Vector& x, double rel_step = 5e-4);

/// BFGS minimization with an Armijo backtracking line search. The objective
/// may return +inf to reject a point (the line search retreats). On
/// non-convergence the best point seen is returned with converged = false.
OptimResult minimize_bfgs(const Objective& f, Vector x0, const OptimOptions& options = {});

}  // namespace phmm
