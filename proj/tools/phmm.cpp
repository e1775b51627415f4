// Command-line front end: simulation, fitting, and plot-ready summary data
// for periodically inhomogeneous hidden Markov models. All figures are
// emitted as CSV/JSON data files; seeds are mandatory for stochastic
// commands so every run is reproducible.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "phmm/check.hpp"
#include "phmm/dwell.hpp"
#include "phmm/error.hpp"
#include "phmm/estimate.hpp"
#include "phmm/hmm.hpp"
#include "phmm/io.hpp"
#include "phmm/stationary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string model_path;
  std::string data_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  long n_cycles = 0;
  long n_series = 1;
  int r_max = 0;  // 0 = choose per command
  int n_seq = 1000;
  int n_draws = 1000;
  std::optional<double> level;
  bool homogeneous = false;
  int max_iterations = 500;
  double tolerance = 1e-4;
};

// The model argument may be a plain model document or a full fit report
// (recognized by its embedded "model"); the fit report additionally carries
// the Hessian needed for confidence bands.
struct LoadedModel {
  phmm::HMMModel model;
  std::optional<phmm::FitResult> fit;
};

LoadedModel load_model(const std::string& path) {
  json j = phmm::read_json(path);
  if (j.contains("model")) {
    phmm::FitResult fit = phmm::fit_from_json(j);
    return LoadedModel{fit.model, std::move(fit)};
  }
  return LoadedModel{phmm::model_from_json(j), std::nullopt};
}

fs::path prepare_out_dir(const RunConfig& config) {
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw phmm::IoError("cannot create output directory '" + config.out_dir + "'");
  return dir;
}

void require_seed(const RunConfig& config) {
  if (!config.seed_given)
    throw phmm::ArgumentError("--seed is required for stochastic commands");
}

int cli_r_max(const RunConfig& config, const phmm::PeriodicTPM& tpm) {
  return config.r_max > 0 ? config.r_max : 4 * tpm.period();
}

int cmd_simulate(const RunConfig& config) {
  require_seed(config);
  if (config.n_cycles < 1) throw phmm::ArgumentError("--n-cycles must be >= 1");
  LoadedModel loaded = load_model(config.model_path);
  const phmm::HMMModel& model = loaded.model;
  const int L = model.period();
  fs::path dir = prepare_out_dir(config);

  std::vector<phmm::ObservationSeries> all;
  for (long k = 0; k < config.n_series; ++k) {
    std::string suffix = config.n_series == 1 ? "" : std::to_string(k + 1);
    phmm::SimulatedSeries sim =
        phmm::simulate(model, config.n_cycles * L, 1, config.seed + k, "sim" + suffix);
    phmm::write_states_csv((dir / ("states" + suffix + ".csv")).string(), sim, L);
    all.push_back(std::move(sim.series));
  }
  phmm::write_series_csv((dir / "simulated.csv").string(), all, L);
  phmm::write_json((dir / "model.json").string(), phmm::model_to_json(model));
  return 0;
}

phmm::HMMModel fit_template(const phmm::HMMModel& base, bool homogeneous) {
  if (!homogeneous) return base;
  std::vector<phmm::StateProcess> processes;
  for (int c = 0; c < base.n_conditions(); ++c) {
    const auto* link = std::get_if<phmm::TrigLinkSpec>(&base.state_process(c));
    if (!link)
      throw phmm::ArgumentError("--homogeneous requires a trigonometric-link model");
    phmm::TrigLinkSpec flat(link->n_states, link->period, 0);
    for (int i = 1; i <= link->n_states; ++i)
      for (int j = 1; j <= link->n_states; ++j)
        if (i != j) flat.coeff(i, j)[0] = link->coeff(i, j)[0];
    processes.emplace_back(std::move(flat));
  }
  return phmm::HMMModel(std::move(processes), base.emissions(), base.initial_policy(),
                        base.fixed_initial());
}

int cmd_fit(const RunConfig& config) {
  LoadedModel loaded = load_model(config.model_path);
  phmm::HMMModel templ = fit_template(loaded.model, config.homogeneous);
  auto data = phmm::read_series_csv(config.data_path);
  fs::path dir = prepare_out_dir(config);

  phmm::FitOptions options;
  options.max_iterations = config.max_iterations;
  options.grad_tol = config.tolerance;
  phmm::FitResult result = phmm::fit(data, templ, options);

  phmm::write_json((dir / "fit.json").string(), phmm::fit_to_json(result));
  phmm::write_json((dir / "fitted_model.json").string(), phmm::model_to_json(result.model));
  if (!result.convergence.converged) {
    std::cerr << "phmm fit: did not converge after " << result.convergence.iterations
              << " iterations (gradient max-norm " << result.convergence.grad_max_norm
              << "); report written\n";
    return 3;
  }
  return 0;
}

int cmd_stationary(const RunConfig& config) {
  LoadedModel loaded = load_model(config.model_path);
  const phmm::HMMModel& model = loaded.model;
  fs::path dir = prepare_out_dir(config);

  std::vector<phmm::PeriodicDistribution> dists;
  for (int c = 0; c < model.n_conditions(); ++c) {
    dists.push_back(phmm::stationary_exact(model.tpm(c)));
    dists.push_back(phmm::stationary_hypothetical(model.tpm(c)));
    if (config.n_cycles > 0) {
      require_seed(config);
      dists.push_back(
          phmm::empirical_state_frequencies(model.tpm(c), config.n_cycles, config.seed + c));
    }
  }
  phmm::write_distributions_csv((dir / "stationary.csv").string(), dists);

  if (config.level) {
    if (!loaded.fit)
      throw phmm::ArgumentError(
          "confidence bands require a fit report (fit.json) as --model");
    require_seed(config);
    auto bands = phmm::mc_confidence(*loaded.fit, phmm::Functional::delta_t,
                                     config.n_draws, *config.level, config.seed);
    phmm::write_bands_csv((dir / "stationary_bands.csv").string(), "t", bands);
  }
  return 0;
}

int cmd_dwell(const RunConfig& config) {
  LoadedModel loaded = load_model(config.model_path);
  const phmm::HMMModel& model = loaded.model;
  const phmm::PeriodicTPM& tpm = model.tpm(0);
  const int r_max = cli_r_max(config, tpm);
  fs::path dir = prepare_out_dir(config);

  std::vector<phmm::DwellPMF> overall;
  std::vector<phmm::DwellPMF> time_varying;
  std::vector<phmm::DwellMeanRow> means;
  for (int i = 1; i <= model.n_states(); ++i) {
    overall.push_back(phmm::dwell_pmf_overall(tpm, i, r_max));
    for (int t = 1; t <= tpm.period(); ++t) {
      time_varying.push_back(phmm::dwell_pmf_at(tpm, i, t, r_max));
      means.push_back({i, t, phmm::dwell_mean_at(tpm, i, t)});
    }
  }
  phmm::write_dwell_csv((dir / "dwell_overall.csv").string(), overall);
  phmm::write_dwell_csv((dir / "dwell_time_varying.csv").string(), time_varying);
  phmm::write_dwell_means_csv((dir / "dwell_means.csv").string(), means);

  if (config.level) {
    if (!loaded.fit)
      throw phmm::ArgumentError(
          "confidence bands require a fit report (fit.json) as --model");
    require_seed(config);
    for (int i = 1; i <= model.n_states(); ++i) {
      auto bands = phmm::mc_confidence(*loaded.fit, phmm::Functional::dwell_mean_t,
                                       config.n_draws, *config.level, config.seed, i);
      phmm::write_bands_csv(
          (dir / ("dwell_mean_bands_state" + std::to_string(i) + ".csv")).string(), "t",
          bands);
    }
  }
  return 0;
}

int cmd_check(const RunConfig& config) {
  require_seed(config);
  LoadedModel loaded = load_model(config.model_path);
  const phmm::HMMModel& model = loaded.model;
  auto data = phmm::read_series_csv(config.data_path);
  for (const auto& s : data)
    if (s.condition != data.front().condition)
      throw phmm::ArgumentError(
          "check: series with mixed conditions; run per condition");
  const int condition = data.front().condition;
  const int r_max = cli_r_max(config, model.tpm(condition));
  fs::path dir = prepare_out_dir(config);

  // Pool decoded-sequence dwell frequencies over all series.
  std::vector<std::vector<int>> sequences;
  for (std::size_t k = 0; k < data.size(); ++k) {
    auto seqs =
        phmm::sample_decoded_sequences(model, data[k], config.n_seq, config.seed + k);
    for (auto& s : seqs) sequences.push_back(std::move(s));
  }

  std::vector<phmm::DwellComparison> comparisons;
  json summary = json::array();
  for (int i = 1; i <= model.n_states(); ++i) {
    phmm::EmpiricalDwell empirical = phmm::empirical_dwell(sequences, i, r_max);
    phmm::DwellPMF analytic = phmm::dwell_pmf_overall(model.tpm(condition), i, r_max);
    phmm::DwellComparison comparison = phmm::compare_dwell(analytic, empirical);
    summary.push_back({{"state", i},
                       {"tv_distance", comparison.tv_distance},
                       {"n_sequences", empirical.n_sequences}});
    comparisons.push_back(std::move(comparison));
  }
  phmm::write_comparison_csv((dir / "dwell_check.csv").string(), comparisons);
  phmm::write_json((dir / "dwell_check_summary.json").string(),
                   json{{"comparisons", summary}});
  return 0;
}

int cmd_compare(const RunConfig& config) {
  require_seed(config);
  if (config.n_cycles < 1) throw phmm::ArgumentError("--n-cycles must be >= 1");
  LoadedModel loaded = load_model(config.model_path);
  const phmm::PeriodicTPM& tpm = loaded.model.tpm(0);
  const int L = tpm.period();
  const int r_max = cli_r_max(config, tpm);
  fs::path dir = prepare_out_dir(config);

  // Monte Carlo reference: state chains simulated directly from the model,
  // run-length encoded with the same censoring as the decoded-sequence check.
  phmm::PeriodicDistribution delta = phmm::stationary_exact(tpm);
  std::vector<std::vector<int>> chains(config.n_seq);
  for (int q = 0; q < config.n_seq; ++q) {
    phmm::Rng rng(config.seed, static_cast<std::uint64_t>(q));
    std::vector<int>& chain = chains[q];
    chain.resize(config.n_cycles * L);
    int state = rng.categorical(delta.at(1));
    for (long tau = 1; tau <= config.n_cycles * L; ++tau) {
      chain[tau - 1] = state + 1;
      state = rng.categorical(tpm.at(phmm::cyclic_index(tau, L)).row(state).transpose());
    }
  }

  std::vector<phmm::DwellComparison> comparisons;
  json summary = json::array();
  for (int i = 1; i <= tpm.n_states(); ++i) {
    phmm::EmpiricalDwell empirical = phmm::empirical_dwell(chains, i, r_max);
    phmm::DwellPMF analytic = phmm::dwell_pmf_overall(tpm, i, r_max);
    phmm::DwellComparison comparison = phmm::compare_dwell(analytic, empirical);
    summary.push_back({{"state", i},
                       {"tv_distance", comparison.tv_distance},
                       {"n_sequences", empirical.n_sequences}});
    comparisons.push_back(std::move(comparison));
  }
  phmm::write_comparison_csv((dir / "dwell_compare.csv").string(), comparisons);
  phmm::write_json((dir / "dwell_compare_summary.json").string(),
                   json{{"comparisons", summary}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodically inhomogeneous hidden Markov models"};
  app.require_subcommand(1);

  RunConfig config;
  double level_value = 0.95;

  auto add_common = [&](CLI::App* cmd, bool needs_data) {
    cmd->add_option("--model", config.model_path, "Model or fit-report JSON")
        ->required()
        ->check(CLI::ExistingFile);
    if (needs_data)
      cmd->add_option("--data", config.data_path, "Observation CSV (id,phase,count)")
          ->required()
          ->check(CLI::ExistingFile);
    cmd->add_option("--out", config.out_dir, "Output directory")->required();
    cmd->add_option("--seed", config.seed, "RNG seed")
        ->each([&](const std::string&) { config.seed_given = true; });
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Simulate states and counts");
  add_common(simulate, false);
  simulate->add_option("--n-cycles", config.n_cycles, "Number of full cycles per series");
  simulate->add_option("--n-series", config.n_series, "Number of independent series")
      ->check(CLI::PositiveNumber);

  CLI::App* fit = app.add_subcommand("fit", "Maximum-likelihood fit");
  add_common(fit, true);
  fit->add_flag("--homogeneous", config.homogeneous,
                "Fit a homogeneous state process (K = 0)");
  fit->add_option("--max-iter", config.max_iterations, "Optimizer iteration cap");
  fit->add_option("--tol", config.tolerance, "Gradient max-norm tolerance");

  CLI::App* stationary =
      app.add_subcommand("stationary", "Periodically stationary and hypothetical distributions");
  add_common(stationary, false);
  stationary->add_option("--n-cycles", config.n_cycles,
                         "Also tally empirical frequencies over this many cycles");
  stationary
      ->add_option("--level", level_value,
                   "Confidence level for MC bands (requires fit report)")
      ->each([&](const std::string& s) { config.level = std::stod(s); });
  stationary->add_option("--n-draws", config.n_draws, "MC draws for bands");

  CLI::App* dwell = app.add_subcommand("dwell", "Dwell-time distributions and means");
  add_common(dwell, false);
  dwell->add_option("--r-max", config.r_max, "Truncation of the dwell support");
  dwell
      ->add_option("--level", level_value,
                   "Confidence level for MC bands (requires fit report)")
      ->each([&](const std::string& s) { config.level = std::stod(s); });
  dwell->add_option("--n-draws", config.n_draws, "MC draws for bands");

  CLI::App* check = app.add_subcommand("check", "Decoded-sequence dwell-time model check");
  add_common(check, true);
  check->add_option("--n-seq", config.n_seq, "Decoded sequences per series");
  check->add_option("--r-max", config.r_max, "Truncation of the dwell support");

  CLI::App* compare =
      app.add_subcommand("compare", "Analytic vs simulated dwell-time distributions");
  add_common(compare, false);
  compare->add_option("--n-cycles", config.n_cycles, "Cycles per simulated chain");
  compare->add_option("--n-seq", config.n_seq, "Number of simulated chains");
  compare->add_option("--r-max", config.r_max, "Truncation of the dwell support");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config);
    if (fit->parsed()) return cmd_fit(config);
    if (stationary->parsed()) return cmd_stationary(config);
    if (dwell->parsed()) return cmd_dwell(config);
    if (check->parsed()) return cmd_check(config);
    if (compare->parsed()) return cmd_compare(config);
  } catch (const phmm::ArgumentError& e) {
    std::cerr << "phmm: usage error: " << e.what() << '\n';
    return 2;
  } catch (const phmm::Error& e) {
    std::cerr << "phmm: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "phmm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
