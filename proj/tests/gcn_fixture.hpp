#pragma once

// Small fixed model used by the gradient and reduction checks.

#include <random>

#include "oracles.hpp"
#include "structopic/gcn.hpp"

namespace fixture {

using namespace structopic;

struct SmallModel {
  Graph graph;
  Eigen::MatrixXd r;
  std::vector<NodeMatrix> inputs;
  std::vector<NeighborSample> samples;
  ModelParams params;
  std::vector<PositivePair> pairs;
  std::vector<NodeId> negatives;
  int q = 3;

  double loss() const {
    const NodeMatrix out = forward(params, inputs, samples);
    return negative_sampling_loss(out, pairs, negatives, q).value;
  }

  ModelParams analytic_gradient() const {
    ForwardCache cache;
    const NodeMatrix out = forward(params, inputs, samples, &cache);
    const auto l = negative_sampling_loss(out, pairs, negatives, q);
    return backward(params, cache, l.gradient);
  }
};

// G(1) (18 nodes), two views of widths 4 and 5, hidden 6, output 4.
inline SmallModel small_model(std::uint64_t seed) {
  SmallModel m;
  m.graph = generate_synthetic({.n = 1});
  const NodeId n = m.graph.num_nodes();
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  m.r.resize(n, 3);
  for (NodeId i = 0; i < n; ++i) {
    const auto row = oracle::dirichlet(gen, 3, 1.0);
    for (int k = 0; k < 3; ++k) m.r(i, k) = row[static_cast<std::size_t>(k)];
  }
  for (int width : {4, 5}) {
    NodeMatrix x(n, width);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
    m.inputs.push_back(std::move(x));
  }
  TrainConfig config;
  config.hidden_dim = 6;
  config.output_dim = 4;
  config.layers = 2;
  Rng rng(seed);
  for (int k = 0; k < config.layers; ++k) {
    m.samples.push_back(sample_neighbors(m.graph, m.r, Weighting::kTopic, 3, rng));
  }
  const int dims[] = {4, 5};
  m.params = init_params(dims, config, rng);
  // A non-zero bias so its gradient is exercised away from the init.
  for (Eigen::Index i = 0; i < m.params.fusion_bias.rows(); ++i) m.params.fusion_bias(i, 0) = 0.1 * normal(gen);
  for (int p = 0; p < 10; ++p) {
    const auto u = static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    const auto nbrs = m.graph.neighbors(u);
    m.pairs.push_back({u, nbrs[rng.uniform_index(nbrs.size())]});
    for (int t = 0; t < m.q; ++t) m.negatives.push_back(static_cast<NodeId>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  }
  return m;
}

// Largest relative error between analytic and central-difference gradients
// over every parameter of the model.
inline double max_gradient_error(SmallModel& m, std::size_t* checked = nullptr) {
  const auto analytic = m.analytic_gradient();
  auto tensors = m.params.tensors();
  const auto grads = analytic.tensors();
  double worst = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    const Eigen::MatrixXd numeric = oracle::numeric_gradient(*tensors[t], [&] { return m.loss(); });
    for (Eigen::Index i = 0; i < numeric.size(); ++i) {
      worst = std::max(worst, oracle::gradient_error(grads[t]->data()[i], numeric.data()[i]));
      ++count;
    }
  }
  if (checked) *checked = count;
  return worst;
}

}  // namespace fixture
