#include <benchmark/benchmark.h>

#include "structopic/graph.hpp"
#include "structopic/walks.hpp"

using namespace structopic;

static void BM_BuildCorpus(benchmark::State& state) {
  const Graph g = generate_synthetic({.n = static_cast<int>(state.range(0))});
  for (auto _ : state) {
    auto b = build_corpus(g, {.walks_per_node = 100, .steps = 10});
    benchmark::DoNotOptimize(b.node_walk.nonZeros());
  }
  state.SetItemsProcessed(state.iterations() * g.num_nodes() * 100);
}
BENCHMARK(BM_BuildCorpus)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_Cooccurrence(benchmark::State& state) {
  const Graph g = generate_synthetic({.n = static_cast<int>(state.range(0))});
  const auto b = build_corpus(g, {.walks_per_node = 100, .steps = 10});
  for (auto _ : state) {
    auto m = build_cooccurrence(b.corpus, b.vocab);
    benchmark::DoNotOptimize(m.nonZeros());
  }
}
BENCHMARK(BM_Cooccurrence)->Arg(3)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_Anonymize(benchmark::State& state) {
  const Graph g = generate_synthetic({.n = 1});
  Rng rng(1);
  const auto walk = sample_walk(g, 0, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(anonymize(walk));
}
BENCHMARK(BM_Anonymize)->Arg(10)->Arg(100);
