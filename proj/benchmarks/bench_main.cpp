#include <benchmark/benchmark.h>

#include <vector>

#include <bmc/estimators.hpp>
#include <bmc/kernels.hpp>
#include <bmc/rng.hpp>
#include <bmc/simulate.hpp>
#include <bmc/trial_rate.hpp>
#include <bmc/wavelet.hpp>

namespace {

void BM_DwtForward(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const int J = static_cast<int>(state.range(1));
  const auto spec = bmc::make_wavelet(8, 2);
  bmc::Rng rng(1, 0);
  std::vector<double> x(std::size_t{1} << (d * J));
  for (auto& v : x) v = rng.uniform();
  const auto box = bmc::Box::cube({0.0, 1.0}, d);
  for (auto _ : state) benchmark::DoNotOptimize(bmc::dwt_forward(x, box, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_DwtForward)->Args({1, 12})->Args({1, 16})->Args({2, 6})->Args({3, 4})->Unit(benchmark::kMicrosecond);

void BM_SimulateTree(benchmark::State& state) {
  const bmc::GrowthFragModel model(2.0, bmc::TrialRate::large_spike().splitting_rate());
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(bmc::simulate_tree(model, bmc::RootLaw::uniform(1.25, 2.25), n, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(bmc::tree_size(n)));
}
BENCHMARK(BM_SimulateTree)->Arg(12)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_EstimateB(benchmark::State& state) {
  const bmc::GrowthFragModel model(2.0, bmc::TrialRate::large_spike().splitting_rate());
  const int n = static_cast<int>(state.range(0));
  const auto tree = bmc::simulate_tree(model, bmc::RootLaw::uniform(1.25, 2.25), n, 42);
  bmc::EstimatorConfig cfg;
  cfg.target = bmc::Target::b;
  for (auto _ : state) benchmark::DoNotOptimize(bmc::estimate_b(tree, cfg));
}
BENCHMARK(BM_EstimateB)->Arg(12)->Arg(15)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
