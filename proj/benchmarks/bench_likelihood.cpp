#include <benchmark/benchmark.h>

#include "phmm/hmm.hpp"

namespace {

phmm::HMMModel reference_model() {
  phmm::Vector b12(3), b21(3), means(2), phis(2);
  b12 << -1.2, 0.85, 0.15;
  b21 << -1.5, -0.7, -1.3;
  means << 4, 30;
  phis << 1.5, 4;
  return phmm::HMMModel(
      phmm::TrigLinkSpec::two_state(24, 1, b12, b21),
      phmm::EmissionSpec(phmm::EmissionFamily::negative_binomial, means, phis));
}

void BM_LogLikelihood(benchmark::State& state) {
  phmm::HMMModel model = reference_model();
  phmm::SimulatedSeries sim = phmm::simulate(model, state.range(0), 1, 5);
  std::vector<phmm::ObservationSeries> data{sim.series};
  for (auto _ : state) benchmark::DoNotOptimize(phmm::log_likelihood(model, data));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_LocalDecode(benchmark::State& state) {
  phmm::HMMModel model = reference_model();
  phmm::SimulatedSeries sim = phmm::simulate(model, state.range(0), 1, 5);
  for (auto _ : state) benchmark::DoNotOptimize(phmm::local_decode(model, sim.series));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_LogLikelihood)->Arg(1000)->Arg(10000)->Arg(100000)->Arg(1000000);
BENCHMARK(BM_LocalDecode)->Arg(1000)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
