#include "phmm/optim.hpp"

#include <cmath>
#include <limits>

#include "phmm/error.hpp"

namespace phmm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Vector fd_gradient(const Objective& f, const Vector& x, double rel_step) {
  const auto n = x.size();
  Vector g(n);
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    double h = rel_step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    double fp = f(xp);
    xp[i] = x[i] - h;
    double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const Objective& f, const Vector& x, double rel_step) {
  const auto n = x.size();
  Vector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = rel_step * std::max(1.0, std::abs(x[i]));

  Matrix hess(n, n);
  const double f0 = f(x);
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[i] = x[i] + h[i];
    double fpp = f(xp);
    xp[i] = x[i] - h[i];
    double fmm = f(xp);
    xp[i] = x[i];
    hess(i, i) = (fpp - 2.0 * f0 + fmm) / (h[i] * h[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      xp[i] = x[i] + h[i];
      xp[j] = x[j] + h[j];
      double fa = f(xp);
      xp[j] = x[j] - h[j];
      double fb = f(xp);
      xp[i] = x[i] - h[i];
      double fd = f(xp);
      xp[j] = x[j] + h[j];
      double fc = f(xp);
      xp[i] = x[i];
      xp[j] = x[j];
      double v = (fa - fb - fc + fd) / (4.0 * h[i] * h[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

namespace {

// Damped Newton finisher on finite-difference derivatives. Returns whether
// the gradient tolerance was met; x, fx and g are updated in place.
bool newton_polish(const Objective& f, Vector& x, double& fx, Vector& g,
                   const OptimOptions& options, int& iterations) {
  if (options.max_polish_iterations <= 0)
    return g.cwiseAbs().maxCoeff() < options.grad_tol;
  Matrix hess = fd_hessian(f, x, 5e-4);
  int refreshes = 0;
  for (int it = 0; it < options.max_polish_iterations; ++it) {
    if (g.cwiseAbs().maxCoeff() < options.grad_tol) return true;
    ++iterations;

    Vector direction;
    Eigen::LDLT<Matrix> ldlt(hess);
    bool usable = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (usable) direction = -ldlt.solve(g);
    if (!usable || !(direction.dot(g) < 0.0)) direction = -g;
    double slope = direction.dot(g);

    double step = 1.0;
    double d_max = direction.cwiseAbs().maxCoeff();
    if (d_max > 1.0) step = 1.0 / d_max;

    bool accepted = false;
    double f_new = kInf;
    Vector x_new;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * direction;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Once the predicted decrease falls below the floating-point
      // resolution of f, the line search cannot measure progress even
      // though the gradient is real. Take the pure Newton step and keep it
      // iff the measured gradient shrinks.
      if (usable && d_max <= 1.0) {
        Vector x_try = x + direction;
        Vector g_try = fd_gradient(f, x_try, options.fd_rel_step);
        if (g_try.cwiseAbs().maxCoeff() < g.cwiseAbs().maxCoeff()) {
          x = std::move(x_try);
          g = std::move(g_try);
          fx = f(x);
          continue;
        }
      }
      // The local model may be stale; rebuild it at most twice.
      if (refreshes++ >= 2) break;
      hess = fd_hessian(f, x, 5e-4);
      continue;
    }
    x = std::move(x_new);
    fx = f_new;
    g = fd_gradient(f, x, options.fd_rel_step);
  }
  return g.cwiseAbs().maxCoeff() < options.grad_tol;
}

}  // namespace

OptimResult minimize_bfgs(const Objective& f, Vector x0, const OptimOptions& options) {
  const auto n = x0.size();
  if (n == 0) throw ArgumentError("minimize_bfgs: empty parameter vector");

  OptimResult best;
  double fx = f(x0);
  if (!std::isfinite(fx))
    throw NumericError("minimize_bfgs: objective not finite at the starting point");

  Vector x = std::move(x0);
  Vector g = fd_gradient(f, x, options.fd_rel_step);
  Matrix h_inv = Matrix::Identity(n, n);
  bool first_update = true;
  bool polished = false;

  for (int it = 1; it <= options.max_iterations; ++it) {
    best.iterations = it;
    double g_max = g.cwiseAbs().maxCoeff();
    if (g_max < options.grad_tol) {
      best.converged = true;
      break;
    }
    if (g_max < options.polish_threshold) {
      best.converged = newton_polish(f, x, fx, g, options, best.iterations);
      polished = true;
      break;
    }

    const double c1 = 1e-4;
    double f_new = kInf;
    Vector x_new;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        // Curvature information has gone bad; retry from steepest descent.
        h_inv = Matrix::Identity(n, n);
        first_update = true;
      }
      Vector direction = -(h_inv * g);
      double slope = direction.dot(g);
      if (!(slope < 0.0)) continue;

      // Keep the first trial point within a sane distance.
      double step = 1.0;
      double d_max = direction.cwiseAbs().maxCoeff();
      if (step * d_max > 10.0) step = 10.0 / d_max;

      // Armijo backtracking.
      for (int ls = 0; ls < 60; ++ls) {
        x_new = x + step * direction;
        f_new = f(x_new);
        if (std::isfinite(f_new) && f_new <= fx + c1 * step * slope) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
    }
    if (!accepted) break;

    Vector g_new = fd_gradient(f, x_new, options.fd_rel_step);
    Vector s = x_new - x;
    Vector y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (first_update) {
        // Size the initial inverse Hessian from the first curvature pair.
        h_inv = (sy / y.dot(y)) * Matrix::Identity(n, n);
        first_update = false;
      }
      // Sherman-Morrison BFGS update of the inverse Hessian.
      Vector hy = h_inv * y;
      double yhy = y.dot(hy);
      h_inv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
               (hy * s.transpose() + s * hy.transpose()) / sy;
    }

    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
  }

  if (!best.converged && !polished)
    best.converged = newton_polish(f, x, fx, g, options, best.iterations);

  best.x = x;
  best.value = fx;
  best.gradient = g;
  return best;
}

}  // namespace phmm
