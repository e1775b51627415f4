#include "phmm/stationary.hpp"

#include <string>

#include "phmm/error.hpp"
#include "phmm/rng.hpp"

namespace phmm {

namespace {

// Breadth-first reachability over edges {m(i,j) > eps} from a start node.
std::vector<bool> reachable(const Matrix& m, double eps, bool transpose) {
  const int n = static_cast<int>(m.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      double w = transpose ? m(v, u) : m(u, v);
      if (w > eps && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

Vector normalized_probabilities(Vector v) {
  // The linear solve can leave entries a few ulp below zero.
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] < 0.0) v[i] = 0.0;
  return v / v.sum();
}

}  // namespace

bool is_irreducible(const Matrix& m, double eps) {
  auto fwd = reachable(m, eps, false);
  auto bwd = reachable(m, eps, true);
  for (std::size_t i = 0; i < fwd.size(); ++i)
    if (!fwd[i] || !bwd[i]) return false;
  return true;
}

Vector stationary_vector(const Matrix& g) {
  const Eigen::Index n = g.rows();
  Matrix a = Matrix::Identity(n, n) - g + Matrix::Ones(n, n);
  Vector x = a.transpose().partialPivLu().solve(Vector::Ones(n));
  return normalized_probabilities(std::move(x));
}

ThinnedTPM thinned_tpm(const PeriodicTPM& tpm, int t) {
  const int L = tpm.period();
  if (t < 1 || t > L)
    throw ArgumentError("thinned_tpm: t must be in 1.." + std::to_string(L));
  Matrix product = tpm.at(t);
  for (int k = 1; k < L; ++k) product *= tpm.at(t + k);
  return ThinnedTPM{t, std::move(product)};
}

PeriodicDistribution stationary_exact(const PeriodicTPM& tpm, StationaryMethod method) {
  const int L = tpm.period();
  PeriodicDistribution dist;
  dist.period = L;
  dist.kind = DistributionKind::exact_delta;
  dist.probs.resize(L);

  if (method == StationaryMethod::direct) {
    for (int t = 1; t <= L; ++t) {
      ThinnedTPM thinned = thinned_tpm(tpm, t);
      if (!is_irreducible(thinned.matrix))
        throw ModelError("stationary_exact: thinned chain at t=" + std::to_string(t) +
                         " is reducible; no unique periodically stationary distribution");
      dist.probs[t - 1] = stationary_vector(thinned.matrix);
    }
    return dist;
  }

  ThinnedTPM thinned = thinned_tpm(tpm, 1);
  if (!is_irreducible(thinned.matrix))
    throw ModelError(
        "stationary_exact: thinned chain is reducible; "
        "no unique periodically stationary distribution");
  dist.probs[0] = stationary_vector(thinned.matrix);
  // Propagation is left un-renormalized: delta(t+1) is delta(t) G(t) exactly.
  for (int t = 1; t < L; ++t)
    dist.probs[t] = tpm.at(t).transpose() * dist.probs[t - 1];
  return dist;
}

PeriodicDistribution stationary_hypothetical(const PeriodicTPM& tpm) {
  const int L = tpm.period();
  PeriodicDistribution dist;
  dist.period = L;
  dist.kind = DistributionKind::hypothetical_rho;
  dist.probs.resize(L);
  for (int t = 1; t <= L; ++t) {
    if (!is_irreducible(tpm.at(t)))
      throw ModelError("stationary_hypothetical: matrix at t=" + std::to_string(t) +
                       " is reducible");
    dist.probs[t - 1] = stationary_vector(tpm.at(t));
  }
  return dist;
}

PeriodicDistribution empirical_state_frequencies(const PeriodicTPM& tpm, long n_cycles,
                                                 std::uint64_t seed) {
  if (n_cycles < 1) throw ArgumentError("empirical_state_frequencies: n_cycles must be >= 1");
  const int L = tpm.period();
  const int N = tpm.n_states();

  PeriodicDistribution delta = stationary_exact(tpm);
  Rng rng(seed);
  Matrix counts = Matrix::Zero(L, N);
  int state = rng.categorical(delta.at(1));
  const long total = n_cycles * static_cast<long>(L);
  for (long tau = 1; tau <= total; ++tau) {
    int phase = cyclic_index(tau, L);
    counts(phase - 1, state) += 1.0;
    state = rng.categorical(tpm.at(phase).row(state).transpose());
  }

  PeriodicDistribution dist;
  dist.period = L;
  dist.kind = DistributionKind::empirical;
  dist.probs.resize(L);
  for (int t = 0; t < L; ++t) dist.probs[t] = counts.row(t).transpose() / double(n_cycles);
  return dist;
}

}  // namespace phmm
