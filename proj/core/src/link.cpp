#include "phmm/link.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phmm/error.hpp"

namespace phmm {

TrigLinkSpec::TrigLinkSpec(int n_states_, int period_, int n_harmonics_)
    : n_states(n_states_), period(period_), n_harmonics(n_harmonics_) {
  if (n_states < 2) throw ArgumentError("TrigLinkSpec: need at least 2 states");
  if (period < 1) throw ArgumentError("TrigLinkSpec: period must be >= 1");
  if (n_harmonics < 0) throw ArgumentError("TrigLinkSpec: n_harmonics must be >= 0");
  coeffs.assign(n_pairs(), Vector::Zero(coeff_length()));
}

TrigLinkSpec TrigLinkSpec::two_state(int period, int n_harmonics, const Vector& beta_12,
                                     const Vector& beta_21) {
  TrigLinkSpec spec(2, period, n_harmonics);
  if (beta_12.size() != spec.coeff_length() || beta_21.size() != spec.coeff_length())
    throw ArgumentError("TrigLinkSpec: coefficient vectors must have length 1 + 2K");
  spec.coeffs[0] = beta_12;
  spec.coeffs[1] = beta_21;
  return spec;
}

int TrigLinkSpec::pair_index(int i, int j) const {
  if (i < 1 || i > n_states || j < 1 || j > n_states)
    throw ArgumentError("TrigLinkSpec: state index out of range");
  if (i == j) throw ArgumentError("TrigLinkSpec: no coefficients for diagonal entries");
  return (i - 1) * (n_states - 1) + (j - 1) - (j > i ? 1 : 0);
}

void TrigLinkSpec::validate() const {
  if (n_states < 2) throw ArgumentError("TrigLinkSpec: need at least 2 states");
  if (period < 1) throw ArgumentError("TrigLinkSpec: period must be >= 1");
  if (n_harmonics < 0) throw ArgumentError("TrigLinkSpec: n_harmonics must be >= 0");
  if (static_cast<int>(coeffs.size()) != n_pairs())
    throw ArgumentError("TrigLinkSpec: expected " + std::to_string(n_pairs()) +
                        " coefficient vectors, got " + std::to_string(coeffs.size()));
  for (const auto& c : coeffs) {
    if (c.size() != coeff_length())
      throw ArgumentError("TrigLinkSpec: coefficient vectors must have length 1 + 2K");
    if (!c.allFinite()) throw ArgumentError("TrigLinkSpec: coefficients must be finite");
  }
}

double linear_predictor(const TrigLinkSpec& spec, int i, int j, int t) {
  if (i == j) throw ArgumentError("linear_predictor: i and j must differ");
  if (t < 1 || t > spec.period)
    throw ArgumentError("linear_predictor: t must be in 1.." + std::to_string(spec.period));
  const Vector& beta = spec.coeff(i, j);
  const int K = spec.n_harmonics;
  double eta = beta[0];
  for (int k = 1; k <= K; ++k) {
    double angle = 2.0 * std::numbers::pi * k * t / spec.period;
    eta += beta[k] * std::sin(angle);
    eta += beta[K + k] * std::cos(angle);
  }
  return eta;
}

PeriodicTPM::PeriodicTPM(std::vector<Matrix> matrices) : matrices_(std::move(matrices)) {
  if (matrices_.empty()) throw ArgumentError("PeriodicTPM: empty schedule");
  const auto n = matrices_.front().rows();
  if (n < 1 || matrices_.front().cols() != n)
    throw ArgumentError("PeriodicTPM: matrices must be square");
  for (std::size_t t = 0; t < matrices_.size(); ++t) {
    const Matrix& m = matrices_[t];
    if (m.rows() != n || m.cols() != n)
      throw ArgumentError("PeriodicTPM: inconsistent matrix dimensions at t=" +
                          std::to_string(t + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
      double row_sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        double v = m(i, j);
        if (!(v >= 0.0 && v <= 1.0))
          throw ArgumentError("PeriodicTPM: entry out of [0, 1] at t=" +
                              std::to_string(t + 1));
        row_sum += v;
      }
      if (std::abs(row_sum - 1.0) > 1e-12)
        throw ArgumentError("PeriodicTPM: row " + std::to_string(i + 1) +
                            " does not sum to 1 at t=" + std::to_string(t + 1));
    }
  }
}

PeriodicTPM build_tpm(const TrigLinkSpec& spec) {
  spec.validate();
  const int N = spec.n_states;
  const int L = spec.period;
  constexpr double kClamp = 709.0;

  std::vector<Matrix> mats;
  mats.reserve(L);
  Vector eta(N);
  for (int t = 1; t <= L; ++t) {
    Matrix m(N, N);
    for (int i = 1; i <= N; ++i) {
      // Reference category is the diagonal: eta_ii = 0.
      double max_eta = 0.0;
      for (int j = 1; j <= N; ++j) {
        if (j == i) {
          eta[j - 1] = 0.0;
          continue;
        }
        double e = linear_predictor(spec, i, j, t);
        e = std::clamp(e, -kClamp, kClamp);
        eta[j - 1] = e;
        max_eta = std::max(max_eta, e);
      }
      double total = 0.0;
      for (int j = 0; j < N; ++j) {
        double w = std::exp(eta[j] - max_eta);
        m(i - 1, j) = w;
        total += w;
      }
      m.row(i - 1) /= total;
    }
    mats.push_back(std::move(m));
  }
  return PeriodicTPM(std::move(mats));
}

}  // namespace phmm
