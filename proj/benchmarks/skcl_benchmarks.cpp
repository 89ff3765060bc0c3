#include <benchmark/benchmark.h>

#include "skcl/denoisers.hpp"
#include "skcl/em.hpp"
#include "skcl/engine.hpp"
#include "skcl/hungarian.hpp"
#include "skcl/kmeans.hpp"
#include "skcl/sketch.hpp"
#include "skcl/synth.hpp"

using namespace skcl;

namespace {

// args: T, M (N = 20)
void BM_ComputeSketch(benchmark::State& state) {
  const Index t = state.range(0), m = state.range(1), n = 20;
  const SyntheticDataset d = gen_gmm({5, n, t, 0, 1});
  const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::adapted_radius, 3.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(compute_sketch(d.train, f));
  state.SetItemsProcessed(state.iterations() * t * m);
}
BENCHMARK(BM_ComputeSketch)->Args({10000, 500})->Args({10000, 2000})->Args({40000, 500})->Unit(benchmark::kMillisecond);

// arg: K
void BM_DenoiseZ(benchmark::State& state) {
  const Index k = state.range(0);
  Rng rng(3);
  GmmHyperparams h = GmmHyperparams::uniform(k, 0.5);
  PseudoPriorZ p{Vector(k), Vector(k)};
  for (Index i = 0; i < k; ++i) {
    p.mean[i] = rng.normal();
    p.variance[i] = 0.1 + rng.uniform();
  }
  const Complex y(0.3, -0.2);
  for (auto _ : state) benchmark::DoNotOptimize(denoise_z(y, p, h, 1.3));
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_DenoiseZ)->Arg(5)->Arg(10)->Arg(20);

// arg: K; M = 2000, N = 20, EM included
void BM_EngineStep(benchmark::State& state) {
  const Index k = state.range(0), n = 20, m = 2000;
  const SyntheticDataset d = gen_gmm({k, n, 5000, 0, 4});
  const FrequencyMatrix f = draw_frequencies(n, m, RadiusLaw::adapted_radius, estimate_scale(d.train, 3), 5);
  const Sketch s = compute_sketch(d.train, f);
  EngineConfig config;
  config.clusters = k;
  const Initialization init = default_init(s, f, k, 6);
  EngineState st = make_state(init.centroids, init.qc, m);
  GmmHyperparams h = init.hyper;
  for (auto _ : state) step(st, s.values, f, h, config, true);
  state.SetComplexityN(k);
}
BENCHMARK(BM_EngineStep)->Arg(4)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oN);

// arg: K; M = 1000
void BM_EmUpdate(benchmark::State& state) {
  const Index k = state.range(0), m = 1000;
  Rng rng(7);
  Matrix zhat(m, k), qz(m, k);
  ComplexVector y(m);
  Vector g(m);
  for (Index i = 0; i < m; ++i) {
    g[i] = 0.3 + 1.5 * rng.uniform();
    y[i] = Complex(0.3 * rng.normal(), 0.3 * rng.normal());
    for (Index j = 0; j < k; ++j) {
      zhat(i, j) = rng.normal();
      qz(i, j) = 0.1 * rng.uniform();
    }
  }
  const EmWorkspace ws{zhat, qz, y, g};
  const GmmHyperparams h = GmmHyperparams::uniform(k, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(update_hyperparams(h.alpha, h.tau, 1.0, ws, Matrix::Zero(1, k), Vector::Ones(k)));
  }
}
BENCHMARK(BM_EmUpdate)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

// args: K, replicates (T = 10000, N = 20)
void BM_KMeansPP(benchmark::State& state) {
  const Index k = state.range(0);
  const SyntheticDataset d = gen_gmm({k, 20, 10000, 0, 8});
  KMeansOptions options;
  options.replicates = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_pp(d.train, k, options));
}
BENCHMARK(BM_KMeansPP)->Args({5, 1})->Args({10, 1})->Args({5, 8})->Unit(benchmark::kMillisecond);

void BM_Hungarian(benchmark::State& state) {
  const Index k = state.range(0);
  const Matrix cost = Matrix::Random(k, k);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(cost));
  state.SetComplexityN(k);
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(4, 128)->Complexity(benchmark::oNCubed);

}  // namespace

BENCHMARK_MAIN();
