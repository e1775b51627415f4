// Recursive vs direct computation of the periodically stationary
// distribution: the recursion solves one linear system and propagates,
// the direct method solves one per cycle position.
#include <benchmark/benchmark.h>

#include "phmm/link.hpp"
#include "phmm/rng.hpp"
#include "phmm/stationary.hpp"

namespace {

phmm::PeriodicTPM random_schedule(int n_states, int period) {
  phmm::Rng rng(1234);
  std::vector<phmm::Matrix> mats;
  for (int t = 0; t < period; ++t) {
    phmm::Matrix m(n_states, n_states);
    for (int i = 0; i < n_states; ++i) {
      double row_sum = 0.0;
      for (int j = 0; j < n_states; ++j) {
        m(i, j) = 0.05 + rng.uniform();
        row_sum += m(i, j);
      }
      m.row(i) /= row_sum;
    }
    mats.push_back(std::move(m));
  }
  return phmm::PeriodicTPM(std::move(mats));
}

void BM_StationaryRecursive(benchmark::State& state) {
  auto tpm = random_schedule(static_cast<int>(state.range(0)),
                             static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto delta = phmm::stationary_exact(tpm, phmm::StationaryMethod::recursive);
    benchmark::DoNotOptimize(delta);
  }
}

void BM_StationaryDirect(benchmark::State& state) {
  auto tpm = random_schedule(static_cast<int>(state.range(0)),
                             static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto delta = phmm::stationary_exact(tpm, phmm::StationaryMethod::direct);
    benchmark::DoNotOptimize(delta);
  }
}

}  // namespace

BENCHMARK(BM_StationaryRecursive)
    ->Args({2, 24})
    ->Args({2, 48})
    ->Args({2, 1440})
    ->Args({5, 48})
    ->Args({10, 48});
BENCHMARK(BM_StationaryDirect)
    ->Args({2, 24})
    ->Args({2, 48})
    ->Args({2, 1440})
    ->Args({5, 48})
    ->Args({10, 48});

BENCHMARK_MAIN();
