#include "phmm/io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "phmm/error.hpp"

namespace phmm {

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericError("format_double: conversion failed");
  return std::string(buf, ptr);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

long parse_long(const std::string& s, std::size_t line_no, const std::string& what) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                    s + "'");
  return value;
}

}  // namespace

std::vector<ObservationSeries> read_series_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
  auto header = split_csv_line(line);
  std::map<std::string, std::size_t> columns;
  for (std::size_t k = 0; k < header.size(); ++k) columns[header[k]] = k;
  for (const char* required : {"id", "phase", "count"})
    if (!columns.count(required))
      throw DataError("'" + path + "': missing column '" + std::string(required) + "'");
  const std::size_t id_col = columns["id"];
  const std::size_t phase_col = columns["phase"];
  const std::size_t count_col = columns["count"];
  const bool has_condition = columns.count("condition") > 0;
  const std::size_t cond_col = has_condition ? columns["condition"] : 0;

  std::vector<ObservationSeries> series;
  std::map<std::string, std::size_t> index_of;
  std::vector<int> last_phase;
  std::vector<int> wrap_length;  // 0 until the first wrap fixes it

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields");

    const std::string& id = fields[id_col];
    int phase = static_cast<int>(parse_long(fields[phase_col], line_no, "phase"));
    if (phase < 1)
      throw DataError("line " + std::to_string(line_no) + ": phase must be >= 1");

    std::optional<long> count;
    if (!fields[count_col].empty()) {
      long c = parse_long(fields[count_col], line_no, "count");
      if (c < 0)
        throw DataError("line " + std::to_string(line_no) + ": negative count");
      count = c;
    }

    auto it = index_of.find(id);
    if (it == index_of.end()) {
      index_of[id] = series.size();
      ObservationSeries s;
      s.id = id;
      s.start_phase = phase;
      if (has_condition)
        s.condition = static_cast<int>(parse_long(fields[cond_col], line_no, "condition"));
      series.push_back(std::move(s));
      last_phase.push_back(phase);
      wrap_length.push_back(0);
      series.back().values.push_back(count);
      continue;
    }

    std::size_t k = it->second;
    int prev = last_phase[k];
    if (phase == 1 && prev != 0) {
      if (wrap_length[k] == 0)
        wrap_length[k] = prev;
      else if (wrap_length[k] != prev)
        throw DataError("line " + std::to_string(line_no) +
                        ": inconsistent cycle length for series '" + id + "'");
    } else if (phase != prev + 1) {
      throw DataError("line " + std::to_string(line_no) + ": phase " +
                      std::to_string(phase) + " does not follow " + std::to_string(prev) +
                      " in series '" + id + "'");
    }
    if (wrap_length[k] != 0 && phase > wrap_length[k])
      throw DataError("line " + std::to_string(line_no) + ": phase exceeds cycle length " +
                      std::to_string(wrap_length[k]));
    last_phase[k] = phase;
    series[k].values.push_back(count);
  }

  if (series.empty()) throw DataError("'" + path + "': no data rows");
  return series;
}

void write_series_csv(const std::string& path, const std::vector<ObservationSeries>& series,
                      int period) {
  auto out = open_output(path);
  bool conditions = false;
  for (const auto& s : series) conditions = conditions || s.condition != 0;
  out << (conditions ? "id,phase,count,condition\n" : "id,phase,count\n");
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      int phase = cyclic_index(s.start_phase + static_cast<long long>(k), period);
      out << s.id << ',' << phase << ',';
      if (s.values[k]) out << *s.values[k];
      if (conditions) out << ',' << s.condition;
      out << '\n';
    }
  }
}

void write_states_csv(const std::string& path, const SimulatedSeries& sim, int period) {
  auto out = open_output(path);
  out << "id,t,phase,state\n";
  for (std::size_t k = 0; k < sim.states.size(); ++k) {
    int phase = cyclic_index(sim.series.start_phase + static_cast<long long>(k), period);
    out << sim.series.id << ',' << (k + 1) << ',' << phase << ',' << sim.states[k] << '\n';
  }
}

namespace {

const char* kind_name(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::exact_delta: return "exact_delta";
    case DistributionKind::hypothetical_rho: return "hypothetical_rho";
    case DistributionKind::empirical: return "empirical";
  }
  return "unknown";
}

}  // namespace

void write_distributions_csv(const std::string& path,
                             const std::vector<PeriodicDistribution>& dists) {
  auto out = open_output(path);
  out << "t,state,probability,kind\n";
  for (const auto& dist : dists)
    for (int t = 1; t <= dist.period; ++t)
      for (Eigen::Index i = 0; i < dist.at(t).size(); ++i)
        out << t << ',' << (i + 1) << ',' << format_double(dist.at(t)[i]) << ','
            << kind_name(dist.kind) << '\n';
}

void write_dwell_csv(const std::string& path, const std::vector<DwellPMF>& pmfs) {
  auto out = open_output(path);
  out << "state,start_time,r,probability\n";
  for (const auto& pmf : pmfs)
    for (int r = 1; r <= pmf.support_max; ++r) {
      out << pmf.state << ',';
      if (pmf.start_time) out << *pmf.start_time;
      out << ',' << r << ',' << format_double(pmf.pmf[r - 1]) << '\n';
    }
}

void write_dwell_means_csv(const std::string& path, const std::vector<DwellMeanRow>& rows) {
  auto out = open_output(path);
  out << "state,t,mean\n";
  for (const auto& row : rows)
    out << row.state << ',' << row.t << ',' << format_double(row.mean) << '\n';
}

void write_comparison_csv(const std::string& path,
                          const std::vector<DwellComparison>& comparisons) {
  auto out = open_output(path);
  out << "state,r,analytic,empirical\n";
  for (const auto& c : comparisons)
    for (int r = 1; r <= c.r_max; ++r)
      out << c.state << ',' << r << ',' << format_double(c.analytic[r - 1]) << ','
          << format_double(c.empirical[r - 1]) << '\n';
}

void write_bands_csv(const std::string& path, const std::string& index_label,
                     const std::vector<BandPoint>& bands) {
  auto out = open_output(path);
  out << index_label << ",state,estimate,lower,upper\n";
  for (const auto& b : bands)
    out << b.index << ',' << b.state << ',' << format_double(b.estimate) << ','
        << format_double(b.lower) << ',' << format_double(b.upper) << '\n';
}

// ---------------------------------------------------------------------------
// JSON.
// ---------------------------------------------------------------------------

namespace {

std::string pair_key(int i, int j) {
  if (i < 10 && j < 10) return std::to_string(i) + std::to_string(j);
  return std::to_string(i) + "," + std::to_string(j);
}

std::pair<int, int> parse_pair_key(const std::string& key) {
  auto comma = key.find(',');
  if (comma != std::string::npos)
    return {std::stoi(key.substr(0, comma)), std::stoi(key.substr(comma + 1))};
  if (key.size() == 2 && std::isdigit(key[0]) && std::isdigit(key[1]))
    return {key[0] - '0', key[1] - '0'};
  throw DataError("link: malformed coefficient key '" + key + "'");
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) v[k] = j[k].get<double>();
  return v;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v[k]);
  return j;
}

}  // namespace

nlohmann::json link_to_json(const TrigLinkSpec& spec) {
  nlohmann::json coeffs = nlohmann::json::object();
  for (int i = 1; i <= spec.n_states; ++i)
    for (int j = 1; j <= spec.n_states; ++j)
      if (i != j) coeffs[pair_key(i, j)] = vector_to_json(spec.coeff(i, j));
  return nlohmann::json{{"n_states", spec.n_states},
                        {"period", spec.period},
                        {"n_harmonics", spec.n_harmonics},
                        {"coeffs", coeffs}};
}

TrigLinkSpec link_from_json(const nlohmann::json& j) {
  TrigLinkSpec spec(j.at("n_states").get<int>(), j.at("period").get<int>(),
                    j.at("n_harmonics").get<int>());
  const auto& coeffs = j.at("coeffs");
  std::size_t seen = 0;
  for (auto it = coeffs.begin(); it != coeffs.end(); ++it) {
    auto [i, jj] = parse_pair_key(it.key());
    spec.coeff(i, jj) = vector_from_json(it.value());
    ++seen;
  }
  if (seen != static_cast<std::size_t>(spec.n_pairs()))
    throw DataError("link: expected " + std::to_string(spec.n_pairs()) +
                    " coefficient vectors, got " + std::to_string(seen));
  spec.validate();
  return spec;
}

namespace {

nlohmann::json tpm_to_json(const PeriodicTPM& tpm) {
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& m : tpm.matrices()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    mats.push_back(std::move(rows));
  }
  return mats;
}

PeriodicTPM tpm_from_json(const nlohmann::json& j) {
  std::vector<Matrix> mats;
  for (const auto& mj : j) {
    Matrix m(mj.size(), mj.empty() ? 0 : mj[0].size());
    for (std::size_t i = 0; i < mj.size(); ++i)
      for (std::size_t k = 0; k < mj[i].size(); ++k) m(i, k) = mj[i][k].get<double>();
    mats.push_back(std::move(m));
  }
  return PeriodicTPM(std::move(mats));
}

nlohmann::json process_to_json(const StateProcess& process) {
  if (const auto* link = std::get_if<TrigLinkSpec>(&process)) return link_to_json(*link);
  return nlohmann::json{{"tpm", tpm_to_json(std::get<PeriodicTPM>(process))}};
}

StateProcess process_from_json(const nlohmann::json& j) {
  if (j.contains("tpm")) return tpm_from_json(j.at("tpm"));
  return link_from_json(j);
}

}  // namespace

nlohmann::json model_to_json(const HMMModel& model) {
  nlohmann::json j;
  if (model.n_conditions() == 1) {
    j["state_process"] = process_to_json(model.state_process(0));
  } else {
    nlohmann::json blocks = nlohmann::json::array();
    for (int c = 0; c < model.n_conditions(); ++c)
      blocks.push_back(process_to_json(model.state_process(c)));
    j["state_process"] = std::move(blocks);
  }

  const EmissionSpec& em = model.emissions();
  nlohmann::json emissions{
      {"family",
       em.family() == EmissionFamily::negative_binomial ? "negative_binomial" : "poisson"},
      {"means", vector_to_json(em.means())}};
  if (em.family() == EmissionFamily::negative_binomial)
    emissions["dispersions"] = vector_to_json(em.dispersions());
  j["emissions"] = std::move(emissions);

  switch (model.initial_policy()) {
    case InitialPolicy::periodic_stationary:
      j["initial_policy"] = "periodic_stationary";
      break;
    case InitialPolicy::uniform:
      j["initial_policy"] = "uniform";
      break;
    case InitialPolicy::fixed:
      j["initial_policy"] = nlohmann::json{{"fixed", vector_to_json(model.fixed_initial())}};
      break;
  }
  return j;
}

HMMModel model_from_json(const nlohmann::json& j) {
  std::vector<StateProcess> processes;
  const auto& sp = j.at("state_process");
  if (sp.is_array()) {
    for (const auto& block : sp) processes.push_back(process_from_json(block));
  } else {
    processes.push_back(process_from_json(sp));
  }

  const auto& ej = j.at("emissions");
  std::string family_name = ej.at("family").get<std::string>();
  EmissionFamily family;
  if (family_name == "negative_binomial")
    family = EmissionFamily::negative_binomial;
  else if (family_name == "poisson")
    family = EmissionFamily::poisson;
  else
    throw DataError("model: unknown emission family '" + family_name + "'");
  Vector means = vector_from_json(ej.at("means"));
  Vector dispersions;
  if (family == EmissionFamily::negative_binomial)
    dispersions = vector_from_json(ej.at("dispersions"));
  EmissionSpec emissions(family, std::move(means), std::move(dispersions));

  InitialPolicy policy = InitialPolicy::periodic_stationary;
  Vector fixed_initial;
  if (j.contains("initial_policy")) {
    const auto& pj = j.at("initial_policy");
    if (pj.is_string()) {
      std::string name = pj.get<std::string>();
      if (name == "periodic_stationary")
        policy = InitialPolicy::periodic_stationary;
      else if (name == "uniform")
        policy = InitialPolicy::uniform;
      else
        throw DataError("model: unknown initial policy '" + name + "'");
    } else {
      policy = InitialPolicy::fixed;
      fixed_initial = vector_from_json(pj.at("fixed"));
    }
  }
  return HMMModel(std::move(processes), std::move(emissions), policy,
                  std::move(fixed_initial));
}

nlohmann::json fit_to_json(const FitResult& fit) {
  WorkingLayout layout = WorkingLayout::from_model(fit.model);
  Vector theta = to_working(fit.model);

  nlohmann::json names = nlohmann::json::array();
  for (int c = 0; c < layout.n_conditions; ++c)
    for (int i = 1; i <= layout.n_states; ++i)
      for (int jj = 1; jj <= layout.n_states; ++jj) {
        if (i == jj) continue;
        for (int m = 0; m < layout.coeff_length(); ++m)
          names.push_back("beta[" + std::to_string(c) + "][" + pair_key(i, jj) + "][" +
                          std::to_string(m) + "]");
      }
  for (int i = 1; i <= layout.n_states; ++i)
    names.push_back("log_mu[" + std::to_string(i) + "]");
  if (layout.family == EmissionFamily::negative_binomial)
    for (int i = 1; i <= layout.n_states; ++i)
      names.push_back("log_phi[" + std::to_string(i) + "]");

  nlohmann::json hessian = nlohmann::json::array();
  for (Eigen::Index i = 0; i < fit.hessian.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < fit.hessian.cols(); ++k) row.push_back(fit.hessian(i, k));
    hessian.push_back(std::move(row));
  }

  nlohmann::json std_errors;
  Eigen::LLT<Matrix> llt(fit.hessian);
  if (llt.info() == Eigen::Success) {
    Matrix cov = llt.solve(Matrix::Identity(fit.hessian.rows(), fit.hessian.cols()));
    std_errors = nlohmann::json::array();
    for (Eigen::Index i = 0; i < cov.rows(); ++i)
      std_errors.push_back(std::sqrt(std::max(0.0, cov(i, i))));
  } else {
    std_errors = nullptr;
  }

  return nlohmann::json{
      {"model", model_to_json(fit.model)},
      {"log_likelihood", fit.log_likelihood},
      {"parameters", vector_to_json(theta)},
      {"parameter_names", names},
      {"standard_errors", std_errors},
      {"hessian", hessian},
      {"convergence",
       {{"status", fit.convergence.converged ? "converged" : "failed"},
        {"iterations", fit.convergence.iterations},
        {"gradient_max_norm", fit.convergence.grad_max_norm}}}};
}

FitResult fit_from_json(const nlohmann::json& j) {
  HMMModel model = model_from_json(j.at("model"));
  const auto& hj = j.at("hessian");
  Matrix hessian(hj.size(), hj.empty() ? 0 : hj[0].size());
  for (std::size_t i = 0; i < hj.size(); ++i)
    for (std::size_t k = 0; k < hj[i].size(); ++k) hessian(i, k) = hj[i][k].get<double>();

  const auto& cj = j.at("convergence");
  Convergence convergence{cj.at("status").get<std::string>() == "converged",
                          cj.at("iterations").get<int>(),
                          cj.at("gradient_max_norm").get<double>()};
  return FitResult{std::move(model), j.at("log_likelihood").get<double>(),
                   std::move(hessian), convergence};
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path + "': " + e.what());
  }
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

}  // namespace phmm
