#include <benchmark/benchmark.h>

#include "vnrecur/classical.hpp"
#include "vnrecur/gns.hpp"
#include "vnrecur/matrix_core.hpp"
#include "vnrecur/random.hpp"
#include "vnrecur/recurrence.hpp"

using namespace vnrecur;

static void BM_HermitianEig(benchmark::State& state) {
  Rng rng(1);
  const ComplexMatrix h = random_hermitian(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(hermitian_eig(h));
}
BENCHMARK(BM_HermitianEig)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

static void BM_CorrelationSequence(benchmark::State& state) {
  const BlockAlgebra alg({4, 3}, {0.5, 0.5});
  Rng rng(2);
  const BoundedQuantumSystem sys(alg, alg.random_hermitian(rng));
  const Endomorphism tau = sys.step(0.3);
  AlgebraElement p = alg.zero();
  p.block(0)(0, 0) = 1.0;
  const LinearFunctional tr = LinearFunctional::trace(alg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(correlation_sequence(tr, p, tau, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_CorrelationSequence)->Arg(100)->Arg(1000);

static void BM_GnsErgodicProjection(benchmark::State& state) {
  const std::size_t m = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> map(m);
  for (std::size_t i = 0; i < m; ++i) map[i] = (i + 1) % m;
  const DiagonalEmbedding emb =
      embed_diagonal(ClassicalSystem(std::vector<double>(m, 1.0 / static_cast<double>(m)), map));
  const AlgebraElement p = emb.indicator({0});
  for (auto _ : state) {
    const GnsSpace space = extend_endomorphism(gns_construct(emb.state), emb.koopman);
    benchmark::DoNotOptimize(ergodic_projection(space, p, 0.01));
  }
}
BENCHMARK(BM_GnsErgodicProjection)->Arg(5)->Arg(12);

BENCHMARK_MAIN();
