#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phmm/check.hpp"
#include "phmm/dwell.hpp"
#include "phmm/estimate.hpp"
#include "phmm/model.hpp"
#include "phmm/stationary.hpp"

namespace phmm {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

// ---------------------------------------------------------------------------
// CSV. Dialect: comma-separated, header row, UTF-8, '.' decimal point,
// empty field = missing value.
// ---------------------------------------------------------------------------

/// Reads count series from columns id, phase, count and optionally
/// condition. Rows of one series must be contiguous per id with phases
/// advancing cyclically; parse errors carry the line number.
std::vector<ObservationSeries> read_series_csv(const std::string& path);

/// Columns id, phase, count (condition appended when any series uses one).
void write_series_csv(const std::string& path, const std::vector<ObservationSeries>& series,
                      int period);

/// Columns id, t, phase, state for a simulated state path.
void write_states_csv(const std::string& path, const SimulatedSeries& sim, int period);

/// Columns t, state, probability, kind; distributions are stacked.
void write_distributions_csv(const std::string& path,
                             const std::vector<PeriodicDistribution>& dists);

/// Columns state, start_time, r, probability; start_time is empty for
/// overall distributions.
void write_dwell_csv(const std::string& path, const std::vector<DwellPMF>& pmfs);

struct DwellMeanRow {
  int state;
  int t;
  double mean;
};

/// Columns state, t, mean.
void write_dwell_means_csv(const std::string& path, const std::vector<DwellMeanRow>& rows);

/// Columns state, r, analytic, empirical.
void write_comparison_csv(const std::string& path,
                          const std::vector<DwellComparison>& comparisons);

/// Columns <index_label>, state, estimate, lower, upper.
void write_bands_csv(const std::string& path, const std::string& index_label,
                     const std::vector<BandPoint>& bands);

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

nlohmann::json link_to_json(const TrigLinkSpec& spec);
TrigLinkSpec link_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const HMMModel& model);
HMMModel model_from_json(const nlohmann::json& j);

nlohmann::json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace phmm
