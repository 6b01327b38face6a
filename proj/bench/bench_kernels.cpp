// Serial reference against OpenMP kernels.
#include <benchmark/benchmark.h>

#include <vector>

#include "asmc/kernels.hpp"
#include "asmc/landscape.hpp"
#include "asmc/potential.hpp"
#include "asmc/smc.hpp"

using namespace asmc;

namespace {

const PotentialPtr& quartic() {
  static const PotentialPtr u = make_potential("quartic");
  return u;
}

const LandscapeSummary& landscape() {
  static const LandscapeSummary ls = landscape_summary(quartic(), 1.0);
  return ls;
}

std::vector<double> cloud(std::size_t n) { return initial_points(InitKind::kCube, 1, n, 1); }

template <kernels::Execution E>
void BM_Propagate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  LangevinParams p;
  p.temperature = 0.1;
  p.total_time = 0.5;
  for (auto _ : state) {
    auto x = cloud(n);
    kernels::propagate(E, *quartic(), x, p, 1, 1);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * p.step_count()));
}

template <kernels::Execution E>
void BM_LogWeights(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = cloud(n);
  std::vector<double> out(n);
  for (auto _ : state) {
    kernels::log_weights(E, *quartic(), x, 0.2, 0.1, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <kernels::Execution E>
void BM_Classify(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = cloud(n);
  for (auto _ : state) {
    auto c = kernels::classify(E, landscape(), x);
    benchmark::DoNotOptimize(c.basin.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_Propagate<kernels::Execution::kSerial>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Propagate<kernels::Execution::kParallel>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_LogWeights<kernels::Execution::kSerial>)->Arg(10000)->Arg(100000);
BENCHMARK(BM_LogWeights<kernels::Execution::kParallel>)->Arg(10000)->Arg(100000);
BENCHMARK(BM_Classify<kernels::Execution::kSerial>)->Arg(10000);
BENCHMARK(BM_Classify<kernels::Execution::kParallel>)->Arg(10000);

BENCHMARK_MAIN();
