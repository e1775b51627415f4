#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phmm/dwell.hpp"
#include "phmm/error.hpp"
#include "support/models.hpp"
#include "support/oracles.hpp"

using namespace phmm;

namespace {

Matrix two_state(double g12, double g21) {
  Matrix m(2, 2);
  m << 1 - g12, g12, g21, 1 - g21;
  return m;
}

}  // namespace

TEST_CASE("geometric reduction of the time-varying pmf") {
  PeriodicTPM tpm = oracles::homogeneous_tpm(two_state(0.1, 0.3), 24);
  DwellPMF d = dwell_pmf_at(tpm, 1, 5, 3);
  CHECK(d.pmf[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(d.pmf[1] == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(d.pmf[2] == doctest::Approx(0.081).epsilon(1e-14));
  CHECK(d.tail_mass == doctest::Approx(0.729).epsilon(1e-12));
}

TEST_CASE("forced exit yields a point mass at one") {
  std::vector<Matrix> mats(6, two_state(0.2, 0.2));
  mats[2] = two_state(1.0, 0.2);  // gamma_11 = 0 at t = 3
  PeriodicTPM tpm(std::move(mats));
  DwellPMF d = dwell_pmf_at(tpm, 1, 3, 8);
  CHECK(d.pmf[0] == 1.0);
  for (int r = 2; r <= 8; ++r) CHECK(d.pmf[r - 1] == 0.0);
  CHECK(d.tail_mass == doctest::Approx(0.0).scale(1).epsilon(1e-15));
}

TEST_CASE("time-varying pmf matches run-length frequencies by start time") {
  PeriodicTPM tpm = build_tpm(models::persistent_link());
  PeriodicDistribution delta = stationary_exact(tpm);
  Rng rng(20250809);
  auto states = oracles::simulate_chain(tpm, 300000L * 24, delta.at(1), rng);

  auto runs = oracles::complete_runs(states, 1, 24);  // state 2, 0-based 1
  // Pick the start time with the most observed entries.
  std::vector<long> entries(25, 0);
  for (const auto& [phase, len] : runs) ++entries[phase];
  int t_star = 1;
  for (int t = 1; t <= 24; ++t)
    if (entries[t] > entries[t_star]) t_star = t;

  const int r_max = 48;
  Vector freq = Vector::Zero(r_max);
  long n = 0;
  for (const auto& [phase, len] : runs) {
    if (phase != t_star) continue;
    ++n;
    if (len <= r_max) freq[len - 1] += 1.0;
  }
  freq /= static_cast<double>(n);

  DwellPMF analytic = dwell_pmf_at(tpm, 2, t_star, r_max);
  CHECK(n > 10000);
  for (int r = 1; r <= r_max; ++r)
    CHECK(std::abs(analytic.pmf[r - 1] - freq[r - 1]) < 0.01);
}

TEST_CASE("expected dwell times: geometric cases") {
  CHECK(dwell_mean_at(oracles::homogeneous_tpm(two_state(0.1, 0.5), 24), 1, 7) ==
        doctest::Approx(10.0).epsilon(1e-12));
  CHECK(dwell_mean_at(oracles::homogeneous_tpm(two_state(0.5, 0.5), 24), 1, 1) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("expected dwell time equals the truncated series") {
  PeriodicTPM tpm = build_tpm(models::persistent_link());
  for (int i = 1; i <= 2; ++i) {
    int r_max = default_support(tpm, i);
    for (int t = 1; t <= 24; ++t) {
      DwellPMF d = dwell_pmf_at(tpm, i, t, r_max);
      double series = 0.0;
      for (int r = 1; r <= r_max; ++r) series += r * d.pmf[r - 1];
      CHECK(dwell_mean_at(tpm, i, t) == doctest::Approx(series).epsilon(1e-8));
    }
  }
}

TEST_CASE("infinite dwell is reported as divergence") {
  PeriodicTPM frozen = oracles::homogeneous_tpm(Matrix::Identity(2, 2), 12);
  CHECK_THROWS_AS(dwell_mean_at(frozen, 1, 1), DivergenceError);
}

TEST_CASE("mixture weights of a homogeneous schedule are uniform") {
  PeriodicTPM tpm = oracles::homogeneous_tpm(two_state(0.15, 0.25), 24);
  MixtureWeights w = mixture_weights(tpm, stationary_exact(tpm), 1);
  for (int t = 1; t <= 24; ++t)
    CHECK(w.weights[t - 1] == doctest::Approx(1.0 / 24).epsilon(1e-13));
  CHECK(std::abs(w.weights.sum() - 1.0) < 1e-12);

  PeriodicTPM single = oracles::homogeneous_tpm(two_state(0.3, 0.3), 1);
  MixtureWeights one = mixture_weights(single, stationary_exact(single), 2);
  CHECK(one.weights.size() == 1);
  CHECK(one.weights[0] == 1.0);
}

TEST_CASE("mixture weights match empirical entry-time frequencies") {
  PeriodicTPM tpm = build_tpm(models::persistent_link());
  PeriodicDistribution delta = stationary_exact(tpm);
  MixtureWeights w = mixture_weights(tpm, delta, 2);

  Rng rng(77);
  auto states = oracles::simulate_chain(tpm, 150000L * 24, delta.at(1), rng);
  auto runs = oracles::complete_runs(states, 1, 24);
  Vector freq = Vector::Zero(24);
  for (const auto& [phase, len] : runs) freq[phase - 1] += 1.0;
  freq /= static_cast<double>(runs.size());

  for (int t = 1; t <= 24; ++t) CHECK(std::abs(w.weights[t - 1] - freq[t - 1]) < 0.01);
}

TEST_CASE("mixture weights preconditions") {
  PeriodicTPM tpm = build_tpm(models::scenario1());
  PeriodicDistribution rho = stationary_hypothetical(tpm);
  CHECK_THROWS_AS(mixture_weights(tpm, rho, 1), ArgumentError);

  // State 2 is never entered: column 2 has no off-diagonal mass.
  Matrix never(2, 2);
  never << 1.0, 0.0, 0.2, 0.8;
  PeriodicTPM frozen = oracles::homogeneous_tpm(never, 4);
  PeriodicDistribution fake;
  fake.period = 4;
  fake.kind = DistributionKind::exact_delta;
  fake.probs.assign(4, models::vec({1.0, 0.0}));
  CHECK_THROWS_AS(mixture_weights(frozen, fake, 2), ModelError);
}

TEST_CASE("overall pmf collapses to the geometric distribution") {
  PeriodicTPM tpm = oracles::homogeneous_tpm(two_state(0.35, 0.2), 24);
  DwellPMF d = dwell_pmf_overall(tpm, 2, 40);
  CHECK_FALSE(d.start_time.has_value());
  for (int r = 1; r <= 40; ++r)
    CHECK(std::abs(d.pmf[r - 1] - 0.2 * std::pow(0.8, r - 1)) < 1e-13);

  PeriodicTPM single = oracles::homogeneous_tpm(two_state(0.35, 0.2), 1);
  DwellPMF d1 = dwell_pmf_overall(single, 2, 40);
  for (int r = 1; r <= 40; ++r)
    CHECK(std::abs(d1.pmf[r - 1] - 0.2 * std::pow(0.8, r - 1)) < 1e-13);
}

TEST_CASE("overall pmf matches averaged run-length frequencies") {
  PeriodicTPM tpm = build_tpm(models::persistent_link());
  PeriodicDistribution delta = stationary_exact(tpm);
  const int r_max = 96;
  DwellPMF analytic = dwell_pmf_overall(tpm, 2, r_max);

  const int n_chains = 32;
  Vector mean_freq = Vector::Zero(r_max);
  for (int q = 0; q < n_chains; ++q) {
    Rng rng(13, q);
    auto states = oracles::simulate_chain(tpm, 1000L * 24, delta.at(1), rng);
    mean_freq += oracles::run_length_frequencies(states, 1, 24, r_max);
  }
  mean_freq /= n_chains;

  double tv = 0.5 * (analytic.pmf - mean_freq).cwiseAbs().sum();
  CHECK(tv < 0.02);
}

TEST_CASE("overall mean: both routes and the simulation agree") {
  PeriodicTPM tpm = oracles::homogeneous_tpm(two_state(0.1, 0.4), 24);
  CHECK(dwell_mean_overall(tpm, 1) == doctest::Approx(10.0).epsilon(1e-12));

  PeriodicTPM periodic = build_tpm(models::persistent_link());
  PeriodicDistribution delta = stationary_exact(periodic);
  MixtureWeights w = mixture_weights(periodic, delta, 2);

  // Route A: the library value. Route B: the same proposition rearranged,
  // sum_t w (L + sum r d) / (sum d) - L.
  double route_b = -24.0;
  for (int t = 1; t <= 24; ++t) {
    DwellPMF d = dwell_pmf_at(periodic, 2, t, 24);
    double sum_d = d.pmf.sum();
    double sum_rd = 0.0;
    for (int r = 1; r <= 24; ++r) sum_rd += r * d.pmf[r - 1];
    route_b += w.weights[t - 1] * (24.0 + sum_rd) / sum_d;
  }
  double mean = dwell_mean_overall(periodic, 2);
  CHECK(mean == doctest::Approx(route_b).epsilon(1e-10));

  Rng rng(5150);
  auto states = oracles::simulate_chain(periodic, 150000L * 24, delta.at(1), rng);
  auto runs = oracles::complete_runs(states, 1, 24);
  double sim_mean = 0.0;
  for (const auto& [phase, len] : runs) sim_mean += static_cast<double>(len);
  sim_mean /= static_cast<double>(runs.size());
  CHECK(std::abs(mean - sim_mean) / sim_mean < 0.02);
}

TEST_CASE("survival values and periodic memorylessness") {
  PeriodicTPM hom = oracles::homogeneous_tpm(two_state(0.1, 0.4), 24);
  CHECK(survival(hom, 1, 3, 0) == 1.0);
  CHECK(survival(hom, 1, std::nullopt, 0) == 1.0);
  CHECK(survival(hom, 1, 7, 3) == doctest::Approx(0.729).epsilon(1e-14));

  PeriodicTPM tpm = build_tpm(models::persistent_link());
  const int L = 24;
  for (int i = 1; i <= 2; ++i) {
    for (int s = 1; s <= 2 * L; ++s) {
      for (int t = 1; t <= L; ++t) {
        double conditional = survival(tpm, i, t, L + s) / survival(tpm, i, t, L);
        CHECK(std::abs(conditional - survival(tpm, i, t, s)) < 1e-10);
      }
      double conditional =
          survival(tpm, i, std::nullopt, L + s) / survival(tpm, i, std::nullopt, L);
      CHECK(std::abs(conditional - survival(tpm, i, std::nullopt, s)) < 1e-10);
    }
  }
}

TEST_CASE("survival is consistent with the pmf") {
  PeriodicTPM tpm = build_tpm(models::scenario1());
  DwellPMF d = dwell_pmf_at(tpm, 1, 4, 30);
  double cumulative = 0.0;
  for (int s = 1; s <= 30; ++s) {
    cumulative += d.pmf[s - 1];
    CHECK(survival(tpm, 1, 4, s) == doctest::Approx(1.0 - cumulative).epsilon(1e-12));
  }
}

TEST_CASE("sum-product identity over one cycle") {
  Rng rng(2024);
  for (int rep = 0; rep < 100; ++rep) {
    int n_states = 2 + static_cast<int>(rng.raw() % 3);
    int period = 1 + static_cast<int>(rng.raw() % 48);
    PeriodicTPM tpm = oracles::random_periodic_tpm(rng, n_states, period);
    for (int i = 1; i <= n_states; ++i) {
      for (int t = 1; t <= period; ++t) {
        DwellPMF d = dwell_pmf_at(tpm, i, t, period);
        double cycle_product = 1.0;
        for (int j = 1; j <= period; ++j) cycle_product *= tpm.staying(j, i);
        CHECK(std::abs(d.pmf.sum() - (1.0 - cycle_product)) <= 1e-13);
      }
    }
  }
}

TEST_CASE("default support controls the tail") {
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    PeriodicTPM tpm = oracles::random_periodic_tpm(rng, 2, 1 + (rep * 5) % 36);
    for (int i = 1; i <= 2; ++i) {
      int r_max = default_support(tpm, i);
      CHECK(r_max % tpm.period() == 0);
      CHECK(r_max <= 10000);
      DwellPMF d = dwell_pmf_at(tpm, i, 1, r_max);
      if (r_max < 10000) CHECK(std::abs(d.tail_mass) < 1e-11);
      CHECK(std::abs(d.pmf.sum() + d.tail_mass - 1.0) < 1e-12);
      DwellPMF overall = dwell_pmf_overall(tpm, i, r_max);
      CHECK(std::abs(overall.pmf.sum() + overall.tail_mass - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("geometric collapse for random homogeneous schedules") {
  Rng rng(88);
  for (int rep = 0; rep < 50; ++rep) {
    Matrix g = oracles::random_periodic_tpm(rng, 2, 1).at(1);
    int period = 1 + static_cast<int>(rng.raw() % 36);
    PeriodicTPM tpm = oracles::homogeneous_tpm(g, period);
    for (int i = 1; i <= 2; ++i) {
      double stay = g(i - 1, i - 1);
      DwellPMF d = dwell_pmf_overall(tpm, i, 50);
      for (int r = 1; r <= 50; ++r)
        CHECK(std::abs(d.pmf[r - 1] - (1 - stay) * std::pow(stay, r - 1)) <= 1e-13);
      CHECK(std::abs(dwell_mean_overall(tpm, i) - 1.0 / (1 - stay)) <= 1e-10);
    }
  }
}

TEST_CASE("argument validation") {
  PeriodicTPM tpm = build_tpm(models::scenario1());
  CHECK_THROWS_AS(dwell_pmf_at(tpm, 0, 1, 5), ArgumentError);
  CHECK_THROWS_AS(dwell_pmf_at(tpm, 3, 1, 5), ArgumentError);
  CHECK_THROWS_AS(dwell_pmf_at(tpm, 1, 0, 5), ArgumentError);
  CHECK_THROWS_AS(dwell_pmf_at(tpm, 1, 25, 5), ArgumentError);
  CHECK_THROWS_AS(dwell_pmf_at(tpm, 1, 1, 0), ArgumentError);
  CHECK_THROWS_AS(survival(tpm, 1, 1, -1), ArgumentError);
}
