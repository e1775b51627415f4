// End-to-end runs of the phmm binary: file outputs, determinism, exit codes.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "phmm/io.hpp"
#include "support/models.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           fs::path("phmm_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  std::string command = std::string(PHMM_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

long count_lines(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  long n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

void write_model(const std::string& path, const phmm::HMMModel& model) {
  phmm::write_json(path, phmm::model_to_json(model));
}

}  // namespace

TEST_CASE("simulate writes the documented files deterministically") {
  TempDir dir("simulate");
  write_model(dir.file("model.json"),
              phmm::HMMModel(models::scenario1(), models::count_emissions()));

  std::string args = "simulate --model " + dir.file("model.json") + " --out " +
                     dir.file("run1") + " --seed 1 --n-cycles 1000";
  REQUIRE(run_cli(args) == 0);
  CHECK(count_lines(dir.file("run1/simulated.csv")) == 24001);  // header + rows
  CHECK(count_lines(dir.file("run1/states.csv")) == 24001);
  CHECK(fs::exists(dir.file("run1/model.json")));

  std::string args2 = "simulate --model " + dir.file("model.json") + " --out " +
                      dir.file("run2") + " --seed 1 --n-cycles 1000";
  REQUIRE(run_cli(args2) == 0);
  CHECK(read_text(dir.file("run1/simulated.csv")) ==
        read_text(dir.file("run2/simulated.csv")));
  CHECK(read_text(dir.file("run1/states.csv")) == read_text(dir.file("run2/states.csv")));
  CHECK(read_text(dir.file("run1/model.json")) == read_text(dir.file("run2/model.json")));
}

TEST_CASE("simulate usage errors") {
  TempDir dir("simerr");
  write_model(dir.file("model.json"),
              phmm::HMMModel(models::scenario1(), models::count_emissions()));
  // n-cycles = 0
  CHECK(run_cli("simulate --model " + dir.file("model.json") + " --out " +
                dir.file("out") + " --seed 1 --n-cycles 0") != 0);
  // seed missing
  CHECK(run_cli("simulate --model " + dir.file("model.json") + " --out " +
                dir.file("out") + " --n-cycles 5") != 0);
  // model missing
  CHECK(run_cli("simulate --model " + dir.file("nope.json") + " --out " + dir.file("out") +
                " --seed 1 --n-cycles 5") != 0);
}

TEST_CASE("stationary emits delta, rho and empirical columns") {
  TempDir dir("stationary");
  write_model(dir.file("model.json"),
              phmm::HMMModel(models::scenario2(), models::count_emissions()));
  REQUIRE(run_cli("stationary --model " + dir.file("model.json") + " --out " +
                  dir.file("out") + " --seed 4 --n-cycles 1000") == 0);

  std::ifstream in(dir.file("out/stationary.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,state,probability,kind");
  double rho_max = 0, rho_min = 1, delta_dev = 0, emp_rows = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string t, state, prob, kind;
    std::getline(row, t, ',');
    std::getline(row, state, ',');
    std::getline(row, prob, ',');
    std::getline(row, kind, ',');
    if (state != "1") continue;
    double p = std::stod(prob);
    if (kind == "hypothetical_rho") {
      rho_max = std::max(rho_max, p);
      rho_min = std::min(rho_min, p);
    } else if (kind == "exact_delta") {
      delta_dev = std::max(delta_dev, std::abs(p - 0.5));
    } else if (kind == "empirical") {
      ++emp_rows;
    }
  }
  CHECK(rho_max > 0.9);
  CHECK(rho_min < 0.1);
  CHECK(delta_dev < 0.1);
  CHECK(emp_rows == 24);
}

TEST_CASE("stationary of a homogeneous model: delta equals rho") {
  TempDir dir("hom");
  phmm::TrigLinkSpec flat =
      phmm::TrigLinkSpec::two_state(24, 0, models::vec({-1.5}), models::vec({-0.5}));
  write_model(dir.file("model.json"), phmm::HMMModel(flat, models::count_emissions()));
  REQUIRE(run_cli("stationary --model " + dir.file("model.json") + " --out " +
                  dir.file("out")) == 0);

  std::ifstream in(dir.file("out/stationary.csv"));
  std::string line;
  std::getline(in, line);
  std::map<std::string, double> delta, rho;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string t, state, prob, kind;
    std::getline(row, t, ',');
    std::getline(row, state, ',');
    std::getline(row, prob, ',');
    std::getline(row, kind, ',');
    if (kind == "exact_delta") delta[t + "," + state] = std::stod(prob);
    if (kind == "hypothetical_rho") rho[t + "," + state] = std::stod(prob);
  }
  REQUIRE(delta.size() == 48);
  for (const auto& [key, value] : delta) CHECK(std::abs(value - rho.at(key)) < 1e-10);
}

TEST_CASE("dwell emits a non-monotone overall pmf for the persistent model") {
  TempDir dir("dwell");
  write_model(dir.file("model.json"), models::persistent_model());
  REQUIRE(run_cli("dwell --model " + dir.file("model.json") + " --out " + dir.file("out") +
                  " --r-max 60") == 0);

  std::ifstream in(dir.file("out/dwell_overall.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "state,start_time,r,probability");
  std::vector<double> state2;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string state, start, r, prob;
    std::getline(row, state, ',');
    std::getline(row, start, ',');
    std::getline(row, r, ',');
    std::getline(row, prob, ',');
    CHECK(start.empty());
    if (state == "2") state2.push_back(std::stod(prob));
  }
  REQUIRE(state2.size() == 60);
  bool rises = false;
  for (std::size_t r = 0; r + 1 < state2.size(); ++r)
    if (state2[r + 1] > state2[r]) rises = true;
  CHECK(rises);

  CHECK(count_lines(dir.file("out/dwell_time_varying.csv")) == 1 + 2 * 24 * 60);
  CHECK(count_lines(dir.file("out/dwell_means.csv")) == 1 + 2 * 24);
}

TEST_CASE("simulate, fit, check round trip") {
  TempDir dir("roundtrip");
  write_model(dir.file("model.json"), models::recovery_model());
  REQUIRE(run_cli("simulate --model " + dir.file("model.json") + " --out " +
                  dir.file("data") + " --seed 7 --n-cycles 40") == 0);

  // The simulated counts are accepted unchanged by fit.
  REQUIRE(run_cli("fit --model " + dir.file("model.json") + " --data " +
                  dir.file("data/simulated.csv") + " --out " + dir.file("fit") +
                  " --homogeneous") == 0);
  CHECK(fs::exists(dir.file("fit/fit.json")));
  json fitted = phmm::read_json(dir.file("fit/fitted_model.json"));
  CHECK(fitted.at("state_process").at("n_harmonics").get<int>() == 0);
  json report = phmm::read_json(dir.file("fit/fit.json"));
  CHECK(report.at("convergence").at("status").get<std::string>() == "converged");

  // The fitted homogeneous model has one matrix repeated over the cycle.
  phmm::HMMModel fitted_model = phmm::model_from_json(fitted);
  for (int t = 2; t <= 24; ++t)
    CHECK(fitted_model.tpm().at(t) == fitted_model.tpm().at(1));

  REQUIRE(run_cli("check --model " + dir.file("fit/fitted_model.json") + " --data " +
                  dir.file("data/simulated.csv") + " --out " + dir.file("check") +
                  " --seed 3 --n-seq 50 --r-max 48") == 0);
  json summary = phmm::read_json(dir.file("check/dwell_check_summary.json"));
  CHECK(summary.at("comparisons").size() == 2);
  CHECK(summary.at("comparisons")[0].contains("tv_distance"));
}

TEST_CASE("fit rejects malformed data") {
  TempDir dir("fiterr");
  write_model(dir.file("model.json"), models::recovery_model());
  std::ofstream(dir.file("empty.csv")) << "";
  CHECK(run_cli("fit --model " + dir.file("model.json") + " --data " +
                dir.file("empty.csv") + " --out " + dir.file("out")) != 0);
  std::ofstream(dir.file("bad.csv")) << "id,phase,count\nx,1,3\nx,5,1\n";
  CHECK(run_cli("fit --model " + dir.file("model.json") + " --data " + dir.file("bad.csv") +
                " --out " + dir.file("out")) != 0);
}

TEST_CASE("compare reproduces the analytic pmf from simulated chains") {
  TempDir dir("compare");
  write_model(dir.file("model.json"), models::persistent_model());
  REQUIRE(run_cli("compare --model " + dir.file("model.json") + " --out " +
                  dir.file("out") + " --seed 9 --n-cycles 1000 --n-seq 32 --r-max 96") ==
          0);
  json summary = phmm::read_json(dir.file("out/dwell_compare_summary.json"));
  for (const auto& entry : summary.at("comparisons"))
    CHECK(entry.at("tv_distance").get<double>() < 0.02);

  // Same command, same bytes.
  REQUIRE(run_cli("compare --model " + dir.file("model.json") + " --out " +
                  dir.file("out2") + " --seed 9 --n-cycles 1000 --n-seq 32 --r-max 96") ==
          0);
  CHECK(read_text(dir.file("out/dwell_compare.csv")) ==
        read_text(dir.file("out2/dwell_compare.csv")));
}

TEST_CASE("stationary confidence bands from a fit report") {
  TempDir dir("bands");
  write_model(dir.file("model.json"), models::recovery_model());
  REQUIRE(run_cli("simulate --model " + dir.file("model.json") + " --out " +
                  dir.file("data") + " --seed 21 --n-cycles 30 --n-series 4") == 0);
  REQUIRE(run_cli("fit --model " + dir.file("model.json") + " --data " +
                  dir.file("data/simulated.csv") + " --out " + dir.file("fit")) == 0);
  REQUIRE(run_cli("stationary --model " + dir.file("fit/fit.json") + " --out " +
                  dir.file("out") + " --seed 5 --level 0.95 --n-draws 200") == 0);
  CHECK(count_lines(dir.file("out/stationary_bands.csv")) == 1 + 48);

  std::ifstream in(dir.file("out/stationary_bands.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,state,estimate,lower,upper");
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string t, state, est, lo, hi;
    std::getline(row, t, ',');
    std::getline(row, state, ',');
    std::getline(row, est, ',');
    std::getline(row, lo, ',');
    std::getline(row, hi, ',');
    CHECK(std::stod(lo) <= std::stod(hi));
    CHECK(std::stod(est) >= 0.0);
    CHECK(std::stod(est) <= 1.0);
  }
}
