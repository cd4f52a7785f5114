#include <benchmark/benchmark.h>

#include "lecam/metrics.hpp"
#include "lecam/nn.hpp"
#include "lecam/rng.hpp"
#include "lecam/synth_data.hpp"
#include "lecam/trainer.hpp"

namespace {

using namespace lecam;

Mat random_batch(Rng& rng, std::size_t n, std::size_t dim) {
  Mat m(n, dim);
  for (double& v : m.data()) v = rng.uniform(-1, 1);
  return m;
}

void BM_Forward(benchmark::State& state) {
  Rng rng(1);
  MlpNet net({2, 64, 64, 1}, Activation::LeakyReLU, rng);
  const Mat batch = random_batch(rng, state.range(0), 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(batch));
  }
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(256);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(2);
  MlpNet net({2, 64, 64, 1}, Activation::LeakyReLU, rng);
  const Mat batch = random_batch(rng, state.range(0), 2);
  Mat ones(state.range(0), 1, 1.0);
  for (auto _ : state) {
    GradTape tape;
    net.forward(batch, &tape);
    benchmark::DoNotOptimize(backward(net, tape, ones));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(256);

void BM_DStep(benchmark::State& state) {
  Rng init_g(3), init_d(4), rng(5);
  MlpNet g({2, 64, 64, 2}, Activation::ReLU, init_g);
  MlpNet d({2, 64, 64, 1}, Activation::LeakyReLU, init_d);
  AdamState opt(d);
  const Mat real = random_batch(rng, 32, 2);
  const Mat z = random_batch(rng, 32, 2);
  LossSpec spec;
  spec.family = LossFamily::Hinge;
  spec.lambda = 0.3;
  AnchorState anchors = make_anchors(0.99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(d_step(g, d, opt, real, z, spec, anchors, true));
  }
}
BENCHMARK(BM_DStep);

void BM_ProxyFrechet(benchmark::State& state) {
  const Dataset2D a = make_ring(2048, 8, 2.0, 0.05, 1);
  const Dataset2D b = make_ring(2048, 8, 2.0, 0.05, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(proxy_frechet(a.points, b.points));
  }
}
BENCHMARK(BM_ProxyFrechet);

}  // namespace

BENCHMARK_MAIN();
