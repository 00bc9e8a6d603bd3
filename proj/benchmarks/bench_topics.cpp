#include <benchmark/benchmark.h>

#include "structopic/graph.hpp"
#include "structopic/topics.hpp"
#include "structopic/walks.hpp"

using namespace structopic;

namespace {

struct Inputs {
  SparseMatrix y;
  SparseMatrix m;
};

const Inputs& g10_inputs() {
  static const Inputs in = [] {
    const Graph g = generate_synthetic({.n = 10});
    auto b = build_corpus(g, {.walks_per_node = 100, .steps = 6});
    auto m = build_cooccurrence(b.corpus, b.vocab);
    return Inputs{std::move(b.node_walk), std::move(m)};
  }();
  return in;
}

}  // namespace

static void BM_Nmf(benchmark::State& state) {
  const auto& in = g10_inputs();
  for (auto _ : state) {
    auto f = nmf_factorize(in.m, {.rank = 3, .max_iters = static_cast<int>(state.range(0)), .tolerance = 0.0});
    benchmark::DoNotOptimize(f.z.data());
  }
}
BENCHMARK(BM_Nmf)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_RecoverWalkTopics(benchmark::State& state) {
  const auto& in = g10_inputs();
  const auto anchors = select_anchors(nmf_factorize(in.m, {.rank = 3}));
  for (auto _ : state) {
    auto fit = recover_walk_topics(in.m, anchors, 3);
    benchmark::DoNotOptimize(fit.u.data());
  }
}
BENCHMARK(BM_RecoverWalkTopics)->Unit(benchmark::kMillisecond);

static void BM_FitAnchorModel(benchmark::State& state) {
  const auto& in = g10_inputs();
  for (auto _ : state) {
    auto fit = fit_anchor_model(in.y, in.m, {.k = 3, .kl = {}});
    benchmark::DoNotOptimize(fit.model.r.data());
  }
}
BENCHMARK(BM_FitAnchorModel)->Unit(benchmark::kMillisecond);

static void BM_NoAnchorLda(benchmark::State& state) {
  const auto& in = g10_inputs();
  for (auto _ : state) {
    auto model = recover_no_anchor(in.y, 3, 0, {.sweeps = 20});
    benchmark::DoNotOptimize(model.u.data());
  }
}
BENCHMARK(BM_NoAnchorLda)->Unit(benchmark::kMillisecond);
