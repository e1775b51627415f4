#include "phmm/model.hpp"

#include <cmath>

#include "phmm/error.hpp"

namespace phmm {

void ObservationSeries::validate(int period, int n_conditions) const {
  if (start_phase < 1 || start_phase > period)
    throw ArgumentError("series '" + id + "': start_phase must be in 1.." +
                        std::to_string(period));
  if (condition < 0 || condition >= n_conditions)
    throw ArgumentError("series '" + id + "': condition " + std::to_string(condition) +
                        " out of range (model has " + std::to_string(n_conditions) +
                        " condition blocks)");
  if (values.empty()) throw DataError("series '" + id + "': no observations");
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] && *values[k] < 0)
      throw DataError("series '" + id + "': negative count at position " +
                      std::to_string(k + 1));
}

namespace {

PeriodicTPM realize(const StateProcess& process) {
  if (const auto* link = std::get_if<TrigLinkSpec>(&process)) return build_tpm(*link);
  return std::get<PeriodicTPM>(process);
}

}  // namespace

HMMModel::HMMModel(StateProcess process, EmissionSpec emissions, InitialPolicy policy,
                   Vector fixed_initial)
    : HMMModel(std::vector<StateProcess>{std::move(process)}, std::move(emissions), policy,
               std::move(fixed_initial)) {}

HMMModel::HMMModel(std::vector<StateProcess> processes, EmissionSpec emissions,
                   InitialPolicy policy, Vector fixed_initial)
    : processes_(std::move(processes)),
      emissions_(std::move(emissions)),
      policy_(policy),
      fixed_initial_(std::move(fixed_initial)) {
  if (processes_.empty()) throw ArgumentError("HMMModel: need at least one state process");

  tpms_.reserve(processes_.size());
  for (const auto& p : processes_) tpms_.push_back(realize(p));

  const int N = emissions_.n_states();
  const int L = tpms_.front().period();
  for (const auto& t : tpms_) {
    if (t.n_states() != N)
      throw ArgumentError("HMMModel: state-process and emission state counts differ");
    if (t.period() != L)
      throw ArgumentError("HMMModel: all condition blocks must share one period");
  }

  switch (policy_) {
    case InitialPolicy::periodic_stationary:
      deltas_.reserve(tpms_.size());
      for (const auto& t : tpms_) deltas_.push_back(stationary_exact(t));
      if (fixed_initial_.size() != 0)
        throw ArgumentError("HMMModel: fixed_initial given without the fixed policy");
      break;
    case InitialPolicy::uniform:
      if (fixed_initial_.size() != 0)
        throw ArgumentError("HMMModel: fixed_initial given without the fixed policy");
      break;
    case InitialPolicy::fixed: {
      if (fixed_initial_.size() != N)
        throw ArgumentError("HMMModel: fixed initial distribution must have length N");
      double sum = 0.0;
      for (Eigen::Index i = 0; i < fixed_initial_.size(); ++i) {
        if (!(fixed_initial_[i] >= 0.0))
          throw ArgumentError("HMMModel: fixed initial entries must be non-negative");
        sum += fixed_initial_[i];
      }
      if (std::abs(sum - 1.0) > 1e-10)
        throw ArgumentError("HMMModel: fixed initial distribution must sum to 1");
      break;
    }
  }
}

void HMMModel::check_condition(int condition) const {
  if (condition < 0 || condition >= n_conditions())
    throw ArgumentError("HMMModel: condition index out of range");
}

const StateProcess& HMMModel::state_process(int condition) const {
  check_condition(condition);
  return processes_[condition];
}

const PeriodicTPM& HMMModel::tpm(int condition) const {
  check_condition(condition);
  return tpms_[condition];
}

Vector HMMModel::initial_distribution(int start_phase, int condition) const {
  check_condition(condition);
  switch (policy_) {
    case InitialPolicy::periodic_stationary:
      return deltas_[condition].at(start_phase);
    case InitialPolicy::uniform:
      return Vector::Constant(n_states(), 1.0 / n_states());
    case InitialPolicy::fixed:
      return fixed_initial_;
  }
  throw ArgumentError("HMMModel: unknown initial policy");
}

}  // namespace phmm
