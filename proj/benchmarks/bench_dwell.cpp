#include <benchmark/benchmark.h>

#include "phmm/dwell.hpp"
#include "phmm/link.hpp"

namespace {

phmm::PeriodicTPM persistent_schedule(int period) {
  phmm::Vector b12(3), b21(3);
  b12 << -3, 1.5, -0.9;
  b21 << -3, 1.2, -1.1;
  return phmm::build_tpm(phmm::TrigLinkSpec::two_state(period, 1, b12, b21));
}

void BM_DwellPmfAt(benchmark::State& state) {
  auto tpm = persistent_schedule(48);
  int r_max = static_cast<int>(state.range(0));
  for (auto _ : state) {
    for (int t = 1; t <= tpm.period(); ++t)
      benchmark::DoNotOptimize(phmm::dwell_pmf_at(tpm, 2, t, r_max));
  }
}

void BM_DwellPmfOverall(benchmark::State& state) {
  auto tpm = persistent_schedule(48);
  int r_max = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(phmm::dwell_pmf_overall(tpm, 2, r_max));
}

void BM_DwellMeanOverall(benchmark::State& state) {
  auto tpm = persistent_schedule(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(phmm::dwell_mean_overall(tpm, 2));
}

}  // namespace

BENCHMARK(BM_DwellPmfAt)->Arg(96)->Arg(960);
BENCHMARK(BM_DwellPmfOverall)->Arg(96)->Arg(960);
BENCHMARK(BM_DwellMeanOverall)->Arg(24)->Arg(48)->Arg(1440);

BENCHMARK_MAIN();
