#include <benchmark/benchmark.h>

#include "structopic/gcn.hpp"

using namespace structopic;

namespace {

struct Model {
  Graph graph;
  std::vector<NodeMatrix> inputs;
  std::vector<NeighborSample> samples;
  ModelParams params;
};

Model make_model(int triples) {
  Model m;
  m.graph = generate_synthetic({.n = triples});
  const auto n = m.graph.num_nodes();
  const Eigen::MatrixXd r = Eigen::MatrixXd::Random(n, 3).cwiseAbs();
  m.inputs = {NodeMatrix::Random(n, 6), NodeMatrix::Random(n, 6)};
  TrainConfig config;
  Rng rng(1);
  for (int k = 0; k < config.layers; ++k) {
    m.samples.push_back(sample_neighbors(m.graph, r, Weighting::kTopic, config.neighbor_sample, rng));
  }
  const int dims[] = {6, 6};
  m.params = init_params(dims, config, rng);
  return m;
}

}  // namespace

static void BM_Forward(benchmark::State& state) {
  const auto m = make_model(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(m.params, m.inputs, m.samples).data());
}
BENCHMARK(BM_Forward)->Arg(10)->Arg(28)->Unit(benchmark::kMillisecond);

static void BM_ForwardBackward(benchmark::State& state) {
  const auto m = make_model(static_cast<int>(state.range(0)));
  const PositivePair pairs[] = {{0, 1}, {2, 3}, {5, 6}};
  const NodeId negatives[] = {7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 4, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  for (auto _ : state) {
    ForwardCache cache;
    const auto out = forward(m.params, m.inputs, m.samples, &cache);
    const auto loss = negative_sampling_loss(out, pairs, negatives, 8);
    benchmark::DoNotOptimize(backward(m.params, cache, loss.gradient).fusion_weight.data());
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(10)->Arg(28)->Unit(benchmark::kMillisecond);

static void BM_SampleNeighbors(benchmark::State& state) {
  const Graph g = generate_synthetic({.n = 28});
  const Eigen::MatrixXd r = Eigen::MatrixXd::Random(g.num_nodes(), 3).cwiseAbs();
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_neighbors(g, r, Weighting::kTopic, 20, rng).nodes.data());
}
BENCHMARK(BM_SampleNeighbors)->Unit(benchmark::kMicrosecond);
