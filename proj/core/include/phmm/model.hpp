#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phmm/emissions.hpp"
#include "phmm/link.hpp"
#include "phmm/stationary.hpp"

namespace phmm {

/// One individual's count series. Counts are non-negative; a missing value
/// is an empty optional. start_phase is the cycle position of the first
/// observation. condition selects the state-process parameter block when the
/// model carries several (e.g. different lighting schedules).
struct ObservationSeries {
  std::string id;
  int start_phase = 1;
  int condition = 0;
  std::vector<std::optional<long>> values;

  void validate(int period, int n_conditions = 1) const;
};

enum class InitialPolicy { periodic_stationary, uniform, fixed };

/// A state process is either a trigonometric link (fitted form) or a raw
/// periodic schedule (fixed form).
using StateProcess = std::variant<TrigLinkSpec, PeriodicTPM>;

/// Count-emission HMM with a periodically inhomogeneous state process.
///
/// The model may carry one state-process block per experimental condition,
/// all sharing the emission distributions. Values are immutable after
/// construction and safe to share across threads; the periodic schedules
/// and (for the periodic_stationary policy) the stationary distributions
/// are precomputed.
class HMMModel {
 public:
  HMMModel(StateProcess process, EmissionSpec emissions,
           InitialPolicy policy = InitialPolicy::periodic_stationary,
           Vector fixed_initial = Vector());
  HMMModel(std::vector<StateProcess> processes, EmissionSpec emissions,
           InitialPolicy policy = InitialPolicy::periodic_stationary,
           Vector fixed_initial = Vector());

  int n_states() const { return emissions_.n_states(); }
  int period() const { return tpms_.front().period(); }
  int n_conditions() const { return static_cast<int>(processes_.size()); }

  const StateProcess& state_process(int condition = 0) const;
  const PeriodicTPM& tpm(int condition = 0) const;
  const EmissionSpec& emissions() const { return emissions_; }
  InitialPolicy initial_policy() const { return policy_; }
  const Vector& fixed_initial() const { return fixed_initial_; }

  /// State distribution at the first observation, per the initial policy
  /// (default: the periodically stationary delta at start_phase).
  Vector initial_distribution(int start_phase, int condition = 0) const;

 private:
  void check_condition(int condition) const;

  std::vector<StateProcess> processes_;
  std::vector<PeriodicTPM> tpms_;
  std::vector<PeriodicDistribution> deltas_;  // only for periodic_stationary
  EmissionSpec emissions_;
  InitialPolicy policy_;
  Vector fixed_initial_;
};

}  // namespace phmm
