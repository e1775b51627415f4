#include "phmm/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "phmm/error.hpp"
#include "phmm/parallel.hpp"
#include "phmm/rng.hpp"

namespace phmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const TrigLinkSpec& require_link(const HMMModel& model, int condition) {
  const auto* link = std::get_if<TrigLinkSpec>(&model.state_process(condition));
  if (!link)
    throw ArgumentError(
        "estimate: the model's state processes must be trigonometric links");
  return *link;
}

}  // namespace

WorkingLayout WorkingLayout::from_model(const HMMModel& model) {
  WorkingLayout layout;
  const TrigLinkSpec& link = require_link(model, 0);
  layout.n_states = model.n_states();
  layout.period = model.period();
  layout.n_harmonics = link.n_harmonics;
  layout.n_conditions = model.n_conditions();
  layout.family = model.emissions().family();
  for (int c = 1; c < layout.n_conditions; ++c) {
    const TrigLinkSpec& other = require_link(model, c);
    if (other.n_harmonics != layout.n_harmonics)
      throw ArgumentError("estimate: all condition blocks must share n_harmonics");
  }
  return layout;
}

TrigLinkSpec WorkingLayout::link_at(const Vector& working, int condition) const {
  TrigLinkSpec link(n_states, period, n_harmonics);
  const int len = coeff_length();
  int offset = beta_offset(condition);
  for (int p = 0; p < n_pairs(); ++p) {
    link.coeffs[p] = working.segment(offset, len);
    offset += len;
  }
  return link;
}

Vector to_working(const HMMModel& model) {
  WorkingLayout layout = WorkingLayout::from_model(model);
  Vector working(layout.size());
  for (int c = 0; c < layout.n_conditions; ++c) {
    const TrigLinkSpec& link = require_link(model, c);
    int offset = layout.beta_offset(c);
    for (int p = 0; p < layout.n_pairs(); ++p) {
      working.segment(offset, layout.coeff_length()) = link.coeffs[p];
      offset += layout.coeff_length();
    }
  }
  const EmissionSpec& em = model.emissions();
  for (int i = 0; i < layout.n_states; ++i)
    working[layout.mu_offset() + i] = std::log(em.means()[i]);
  if (layout.family == EmissionFamily::negative_binomial)
    for (int i = 0; i < layout.n_states; ++i)
      working[layout.phi_offset() + i] = std::log(em.dispersions()[i]);
  return working;
}

Vector relabel_working(const Vector& working, const WorkingLayout& layout) {
  const int N = layout.n_states;
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return working[layout.mu_offset() + a] < working[layout.mu_offset() + b];
  });
  bool identity = true;
  for (int i = 0; i < N; ++i) identity = identity && order[i] == i;
  if (identity) return working;

  // order[a] is the old label of new state a (both 0-based here).
  Vector out(working.size());
  TrigLinkSpec index_helper(N, layout.period, layout.n_harmonics);
  const int len = layout.coeff_length();
  for (int c = 0; c < layout.n_conditions; ++c) {
    int base = layout.beta_offset(c);
    for (int a = 1; a <= N; ++a) {
      for (int b = 1; b <= N; ++b) {
        if (a == b) continue;
        int to = base + index_helper.pair_index(a, b) * len;
        int from = base + index_helper.pair_index(order[a - 1] + 1, order[b - 1] + 1) * len;
        out.segment(to, len) = working.segment(from, len);
      }
    }
  }
  for (int i = 0; i < N; ++i)
    out[layout.mu_offset() + i] = working[layout.mu_offset() + order[i]];
  if (layout.family == EmissionFamily::negative_binomial)
    for (int i = 0; i < N; ++i)
      out[layout.phi_offset() + i] = working[layout.phi_offset() + order[i]];
  return out;
}

HMMModel from_working(const Vector& working, const HMMModel& templ) {
  WorkingLayout layout = WorkingLayout::from_model(templ);
  if (working.size() != layout.size())
    throw ArgumentError("from_working: expected " + std::to_string(layout.size()) +
                        " parameters, got " + std::to_string(working.size()));
  Vector w = relabel_working(working, layout);

  std::vector<StateProcess> processes;
  processes.reserve(layout.n_conditions);
  for (int c = 0; c < layout.n_conditions; ++c) processes.emplace_back(layout.link_at(w, c));

  Vector means(layout.n_states);
  for (int i = 0; i < layout.n_states; ++i)
    means[i] = std::exp(w[layout.mu_offset() + i]);
  Vector phis;
  if (layout.family == EmissionFamily::negative_binomial) {
    phis.resize(layout.n_states);
    for (int i = 0; i < layout.n_states; ++i)
      phis[i] = std::exp(w[layout.phi_offset() + i]);
  }
  EmissionSpec emissions(layout.family, std::move(means), std::move(phis));
  return HMMModel(std::move(processes), std::move(emissions), templ.initial_policy(),
                  templ.fixed_initial());
}

namespace {

// Negative joint log-likelihood as a function of the working vector.
// Rebuilds schedules and the emission table per evaluation; returns +inf
// for parameter values where the model degenerates (the line search then
// retreats).
class NegLogLik {
 public:
  NegLogLik(const std::vector<ObservationSeries>& data, const WorkingLayout& layout,
            InitialPolicy policy, const Vector& fixed_initial)
      : data_(data), layout_(layout), policy_(policy), fixed_initial_(fixed_initial) {
    max_count_ = 0;
    for (const auto& s : data_)
      for (const auto& v : s.values)
        if (v) max_count_ = std::max(max_count_, *v);
    order_.resize(data_.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return data_[a].id < data_[b].id;
    });
  }

  double operator()(const Vector& working) const {
    try {
      // Per-condition schedules and initial distributions.
      std::vector<PeriodicTPM> tpms;
      std::vector<PeriodicDistribution> deltas;
      tpms.reserve(layout_.n_conditions);
      for (int c = 0; c < layout_.n_conditions; ++c)
        tpms.push_back(build_tpm(layout_.link_at(working, c)));
      if (policy_ == InitialPolicy::periodic_stationary)
        for (const auto& t : tpms) deltas.push_back(stationary_exact(t));

      // Emission log-pmf table over the observed count range.
      const int N = layout_.n_states;
      Matrix table(N, max_count_ + 1);
      for (int i = 0; i < N; ++i) {
        double mu = std::exp(working[layout_.mu_offset() + i]);
        if (!std::isfinite(mu) || mu <= 0.0) return kInf;
        if (layout_.family == EmissionFamily::negative_binomial) {
          double phi = std::exp(working[layout_.phi_offset() + i]);
          if (!std::isfinite(phi) || phi <= 0.0) return kInf;
          for (long x = 0; x <= max_count_; ++x)
            table(i, x) = neg_binomial_log_pmf(x, mu, phi);
        } else {
          for (long x = 0; x <= max_count_; ++x) table(i, x) = poisson_log_pmf(x, mu);
        }
      }

      std::vector<double> per_series(data_.size());
      parallel_for(static_cast<int>(data_.size()), [&](int k) {
        per_series[k] = series_loglik(data_[k], tpms, deltas, table);
      });
      double total = 0.0;
      for (std::size_t k : order_) total += per_series[k];
      return std::isfinite(total) ? -total : kInf;
    } catch (const ModelError&) {
      return kInf;
    } catch (const NumericError&) {
      return kInf;
    }
  }

 private:
  double series_loglik(const ObservationSeries& s, const std::vector<PeriodicTPM>& tpms,
                       const std::vector<PeriodicDistribution>& deltas,
                       const Matrix& table) const {
    const PeriodicTPM& tpm = tpms[s.condition];
    const int L = tpm.period();
    const int N = layout_.n_states;
    const auto T = static_cast<Eigen::Index>(s.values.size());

    Eigen::RowVectorXd v(N);
    switch (policy_) {
      case InitialPolicy::periodic_stationary:
        v = deltas[s.condition].at(s.start_phase).transpose();
        break;
      case InitialPolicy::uniform:
        v.setConstant(1.0 / N);
        break;
      case InitialPolicy::fixed:
        v = fixed_initial_.transpose();
        break;
    }

    KahanSum loglik;
    Eigen::RowVectorXd weights(N);
    auto apply_emission = [&](Eigen::Index tau) {
      if (!s.values[tau]) return 0.0;
      long x = *s.values[tau];
      double m = table.col(x).maxCoeff();
      for (int i = 0; i < N; ++i) weights[i] = std::exp(table(i, x) - m);
      v = v.cwiseProduct(weights);
      return m;
    };

    double shift = apply_emission(0);
    double c = v.sum();
    if (!(c > 0.0) || !std::isfinite(c)) throw NumericError("non-finite forward value");
    loglik.add(std::log(c) + shift);
    v /= c;
    for (Eigen::Index tau = 2; tau <= T; ++tau) {
      int phase = cyclic_index(s.start_phase + tau - 2, L);
      v *= tpm.at(phase);
      shift = apply_emission(tau - 1);
      c = v.sum();
      if (!(c > 0.0) || !std::isfinite(c)) throw NumericError("non-finite forward value");
      loglik.add(std::log(c) + shift);
      v /= c;
    }
    return loglik.value();
  }

  const std::vector<ObservationSeries>& data_;
  WorkingLayout layout_;
  InitialPolicy policy_;
  Vector fixed_initial_;
  long max_count_ = 0;
  std::vector<std::size_t> order_;
};

Vector default_start(const std::vector<ObservationSeries>& data, const WorkingLayout& layout) {
  std::vector<long> counts;
  for (const auto& s : data)
    for (const auto& v : s.values)
      if (v) counts.push_back(*v);
  if (counts.empty()) throw DataError("fit: no observed counts");
  std::sort(counts.begin(), counts.end());
  if (counts.front() == counts.back())
    throw DataError("fit: degenerate data (all observed counts equal)");

  Vector start = Vector::Zero(layout.size());
  const int len = layout.coeff_length();
  for (int c = 0; c < layout.n_conditions; ++c)
    for (int p = 0; p < layout.n_pairs(); ++p)
      start[layout.beta_offset(c) + p * len] = -2.0;

  const int N = layout.n_states;
  double previous = 0.0;
  for (int k = 1; k <= N; ++k) {
    double q = (2.0 * k - 1.0) / (2.0 * N);
    auto pos = static_cast<std::size_t>(q * (counts.size() - 1));
    double mu = std::max(static_cast<double>(counts[pos]), 1e-2);
    if (k > 1) mu = std::max(mu, previous * 1.05 + 1e-2);
    previous = mu;
    start[layout.mu_offset() + k - 1] = std::log(mu);
  }
  if (layout.family == EmissionFamily::negative_binomial)
    for (int i = 0; i < N; ++i) start[layout.phi_offset() + i] = 0.0;  // phi = 1
  return start;
}

}  // namespace

FitResult fit(const std::vector<ObservationSeries>& data, const HMMModel& templ,
              const FitOptions& options) {
  if (data.empty()) throw ArgumentError("fit: no data");
  WorkingLayout layout = WorkingLayout::from_model(templ);
  for (const auto& s : data) s.validate(layout.period, layout.n_conditions);

  Vector start;
  if (options.start) {
    if (options.start->size() != layout.size())
      throw ArgumentError("fit: start override has wrong length");
    start = *options.start;
  } else {
    start = default_start(data, layout);
  }

  NegLogLik objective(data, layout, templ.initial_policy(), templ.fixed_initial());
  OptimOptions opt;
  opt.max_iterations = options.max_iterations;
  opt.grad_tol = options.grad_tol;
  OptimResult result = minimize_bfgs([&](const Vector& w) { return objective(w); },
                                     std::move(start), opt);

  Vector theta = relabel_working(result.x, layout);
  Matrix hessian =
      fd_hessian([&](const Vector& w) { return objective(w); }, theta, 5e-4);

  FitResult out{from_working(theta, templ), -objective(theta), std::move(hessian),
                Convergence{result.converged, result.iterations,
                            result.gradient.cwiseAbs().maxCoeff()}};
  return out;
}

namespace {

// Pushes one working vector through a state-process functional; emission
// parameters do not enter any of the supported functionals.
std::vector<double> eval_functional(const Vector& working, const WorkingLayout& layout,
                                    Functional functional, int state, int condition,
                                    int r_max) {
  PeriodicTPM tpm = build_tpm(layout.link_at(working, condition));
  std::vector<double> values;
  switch (functional) {
    case Functional::delta_t: {
      PeriodicDistribution d = stationary_exact(tpm);
      for (int t = 1; t <= layout.period; ++t)
        for (int i = 0; i < layout.n_states; ++i) values.push_back(d.at(t)[i]);
      break;
    }
    case Functional::rho_t: {
      PeriodicDistribution d = stationary_hypothetical(tpm);
      for (int t = 1; t <= layout.period; ++t)
        for (int i = 0; i < layout.n_states; ++i) values.push_back(d.at(t)[i]);
      break;
    }
    case Functional::dwell_mean_t: {
      for (int t = 1; t <= layout.period; ++t)
        values.push_back(dwell_mean_at(tpm, state, t));
      break;
    }
    case Functional::dwell_pmf_overall: {
      DwellPMF pmf = dwell_pmf_overall(tpm, state, r_max);
      for (int r = 0; r < r_max; ++r) values.push_back(pmf.pmf[r]);
      break;
    }
  }
  return values;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  double pos = q * (sorted.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

std::vector<BandPoint> mc_confidence(const FitResult& fit, Functional functional,
                                     int n_draws, double level, std::uint64_t seed,
                                     int state, int condition, int r_max) {
  if (n_draws < 1) throw ArgumentError("mc_confidence: n_draws must be >= 1");
  if (!(level >= 0.0 && level < 1.0))
    throw ArgumentError("mc_confidence: level must be in [0, 1)");
  WorkingLayout layout = WorkingLayout::from_model(fit.model);
  if (state < 1 || state > layout.n_states)
    throw ArgumentError("mc_confidence: state out of range");
  if (condition < 0 || condition >= layout.n_conditions)
    throw ArgumentError("mc_confidence: condition out of range");
  if (fit.hessian.rows() != layout.size() || fit.hessian.cols() != layout.size())
    throw UncertaintyError("mc_confidence: hessian has wrong dimensions");

  Eigen::LLT<Matrix> llt(fit.hessian);
  if (llt.info() != Eigen::Success)
    throw UncertaintyError(
        "mc_confidence: hessian is not positive definite; consider "
        "profile-likelihood intervals instead");

  Vector theta = to_working(fit.model);
  if (functional == Functional::dwell_pmf_overall && r_max < 1)
    r_max = default_support(build_tpm(layout.link_at(theta, condition)), state);

  std::vector<double> point =
      eval_functional(theta, layout, functional, state, condition, r_max);
  const auto n_points = point.size();

  // theta_d = theta + U^-1 z with H = U^T U gives cov(theta_d) = H^-1.
  std::vector<std::vector<double>> draws(n_draws);
  parallel_for(n_draws, [&](int d) {
    Rng rng(seed, static_cast<std::uint64_t>(d));
    Vector z(layout.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    Vector delta = llt.matrixU().solve(z);
    draws[d] = eval_functional(theta + delta, layout, functional, state, condition, r_max);
  });

  double q_lo = (1.0 - level) / 2.0;
  double q_hi = (1.0 + level) / 2.0;
  std::vector<BandPoint> bands(n_points);
  std::vector<double> column(n_draws);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (int d = 0; d < n_draws; ++d) column[d] = draws[d][p];
    std::sort(column.begin(), column.end());
    BandPoint& bp = bands[p];
    bp.estimate = point[p];
    bp.lower = quantile_sorted(column, q_lo);
    bp.upper = quantile_sorted(column, q_hi);
    if (functional == Functional::delta_t || functional == Functional::rho_t) {
      bp.index = static_cast<int>(p / layout.n_states) + 1;
      bp.state = static_cast<int>(p % layout.n_states) + 1;
    } else {
      bp.index = static_cast<int>(p) + 1;
      bp.state = state;
    }
  }
  return bands;
}

}  // namespace phmm
