// Apache License, Version 2.0, refer to LICENSE.txt

#include <benchmark/benchmark.h>

#include "raretype/inference.hpp"
#include "raretype/oracle.hpp"
#include "raretype/pyp.hpp"

namespace {

using namespace raretype;

void BM_CrpSeating(benchmark::State& state) {
  const HyperParams h(0.5, 20.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(crp_table_sizes(n, h, Seed{++seed}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CrpSeating)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_LogEppf(benchmark::State& state) {
  const auto p = to_integer_partition(crp_sample(static_cast<std::size_t>(state.range(0)), HyperParams(0.5, 216.0), Seed{1}));
  const HyperParams h(0.49, 230.0);
  for (auto _ : state) benchmark::DoNotOptimize(log_eppf(p, h));
}
BENCHMARK(BM_LogEppf)->Arg(100)->Arg(18'925)->Arg(1'000'000);

void BM_MleFit(benchmark::State& state) {
  const auto p = to_integer_partition(crp_sample(18'925, HyperParams(0.5, 216.0), Seed{2}));
  for (auto _ : state) benchmark::DoNotOptimize(mle_fit(p));
}
BENCHMARK(BM_MleFit)->Unit(benchmark::kMillisecond);

void BM_PosteriorQuadrature(benchmark::State& state) {
  const auto p = to_integer_partition(
      extend_with_suspect(crp_sample(static_cast<std::size_t>(state.range(0)), HyperParams(0.5, 216.0), Seed{3})));
  const auto prior = Hyperprior::diffuse();
  for (auto _ : state) benchmark::DoNotOptimize(posterior_mean_phi(p, prior));
}
BENCHMARK(BM_PosteriorQuadrature)->Arg(100)->Arg(18'925)->Unit(benchmark::kMillisecond);

void BM_MetropolisStep(benchmark::State& state) {
  std::vector<double> w;
  for (int i = 1; i <= 2085; ++i) w.push_back(1.0 / i);
  const PopulationFreqs p(w);
  const IntegerPartition part({1, 2, 3, 5}, {40, 12, 4, 2});
  ChiChain chain(p, part, ChiAssignment::initial(p.size(), part));
  Rng rng = make_rng(Seed{4});
  for (auto _ : state) benchmark::DoNotOptimize(chain.step(rng));
}
BENCHMARK(BM_MetropolisStep);

}  // namespace

BENCHMARK_MAIN();
