#include <benchmark/benchmark.h>

#include "lecam/divergences.hpp"
#include "lecam/rng.hpp"
#include "lecam/tabular_oracle.hpp"

namespace {

lecam::DiscreteDistribution random_dist(lecam::Rng& rng, std::size_t support) {
  std::vector<double> w(support);
  for (double& x : w) x = rng.uniform(0.01, 1.0);
  return lecam::DiscreteDistribution::normalized(std::move(w));
}

void BM_Lecam(benchmark::State& state) {
  lecam::Rng rng(1);
  const auto p = random_dist(rng, state.range(0));
  const auto q = random_dist(rng, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lecam::lecam(p, q));
  }
}
BENCHMARK(BM_Lecam)->Arg(8)->Arg(64)->Arg(512);

void BM_JsClosedForm(benchmark::State& state) {
  lecam::Rng rng(2);
  const auto p = random_dist(rng, state.range(0));
  const auto q = random_dist(rng, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lecam::divergence(lecam::DivergenceKind::JS, p, q));
  }
}
BENCHMARK(BM_JsClosedForm)->Arg(8)->Arg(64)->Arg(512);

void BM_GenericEvaluator(benchmark::State& state) {
  lecam::Rng rng(3);
  const auto p = random_dist(rng, 64);
  const auto q = random_dist(rng, 64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        lecam::generic_f_divergence(lecam::DivergenceKind::LeCam, p, q));
  }
}
BENCHMARK(BM_GenericEvaluator);

void BM_Prop1Game(benchmark::State& state) {
  lecam::Rng rng(4);
  const auto pd = random_dist(rng, 32);
  const auto pg = random_dist(rng, 32);
  const lecam::TabularGame game(pd, pg, 0.3, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lecam::virtual_objective(game));
  }
}
BENCHMARK(BM_Prop1Game);

}  // namespace

BENCHMARK_MAIN();
