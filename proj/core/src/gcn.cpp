#include "structopic/gcn.hpp"

#include <cmath>
#include <string>

#include "structopic/error.hpp"

namespace structopic {

namespace {

constexpr double kNormEpsilon = 1e-12;

}  // namespace

std::vector<double> topic_weights(const Eigen::MatrixXd& r, NodeId i,
                                  std::span<const NodeId> neighbors) {
  const auto n = neighbors.size();
  std::vector<double> w(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  if (n == 0) return w;
  std::vector<double> dots(n);
  double sum = 0.0;
  bool all_equal = true;
  for (std::size_t t = 0; t < n; ++t) {
    dots[t] = r.row(i).dot(r.row(neighbors[t]));
    sum += dots[t];
    all_equal = all_equal && dots[t] == dots[0];
  }
  if (all_equal || !(sum > 0.0)) return w;
  for (std::size_t t = 0; t < n; ++t) w[t] = dots[t] / sum;
  return w;
}

NeighborSample sample_neighbors(const Graph& graph, const Eigen::MatrixXd& r, Weighting weighting,
                                int budget, Rng& rng) {
  if (budget < 1) throw ParameterError("neighbor sample budget must be >= 1");
  const auto n = static_cast<std::size_t>(graph.num_nodes());
  if (weighting == Weighting::kTopic && static_cast<std::size_t>(r.rows()) != n) {
    throw DimensionError("node-topic matrix has " + std::to_string(r.rows()) + " rows for " +
                         std::to_string(n) + " nodes");
  }
  NeighborSample sample;
  sample.nodes.resize(n);
  sample.weights.resize(n);
  const auto b = static_cast<std::size_t>(budget);
  std::vector<NodeId> pool;
  for (std::size_t i = 0; i < n; ++i) {
    const auto nbrs = graph.neighbors(static_cast<NodeId>(i));
    auto& chosen = sample.nodes[i];
    if (nbrs.empty()) continue;
    if (nbrs.size() >= b) {
      pool.assign(nbrs.begin(), nbrs.end());
      for (std::size_t t = 0; t < b; ++t) {
        const auto j = t + rng.uniform_index(pool.size() - t);
        std::swap(pool[t], pool[j]);
      }
      chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(b));
    } else {
      chosen.resize(b);
      for (auto& v : chosen) v = nbrs[rng.uniform_index(nbrs.size())];
    }
    if (weighting == Weighting::kTopic) {
      sample.weights[i] = topic_weights(r, static_cast<NodeId>(i), chosen);
    } else {
      sample.weights[i].assign(chosen.size(), 1.0 / static_cast<double>(chosen.size()));
    }
  }
  return sample;
}

NodeMatrix init_structural_features(const WalkCorpus& corpus, const TopicModel& topics) {
  const auto n = static_cast<Eigen::Index>(corpus.num_nodes());
  if (topics.r.rows() != n) {
    throw DimensionError("node-topic matrix has " + std::to_string(topics.r.rows()) + " rows for " +
                         std::to_string(n) + " nodes");
  }
  const auto alpha = static_cast<Eigen::Index>(topics.anchors.size());
  const Eigen::Index k = topics.r.cols();
  NodeMatrix out = NodeMatrix::Zero(n, alpha + k);
  const double scale = corpus.walks_per_node > 0 ? 1.0 / corpus.walks_per_node : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int token : corpus.documents[static_cast<std::size_t>(i)]) {
      for (Eigen::Index a = 0; a < alpha; ++a) {
        if (topics.anchors.ids[static_cast<std::size_t>(a)] == token) out(i, a) += scale;
      }
    }
    out.row(i).tail(k) = topics.r.row(i);
  }
  return out;
}

std::vector<Eigen::MatrixXd*> ModelParams::tensors() {
  std::vector<Eigen::MatrixXd*> out;
  for (auto& view : layer_weights)
    for (auto& w : view) out.push_back(&w);
  out.push_back(&fusion_weight);
  out.push_back(&fusion_bias);
  return out;
}

std::vector<const Eigen::MatrixXd*> ModelParams::tensors() const {
  std::vector<const Eigen::MatrixXd*> out;
  for (const auto& view : layer_weights)
    for (const auto& w : view) out.push_back(&w);
  out.push_back(&fusion_weight);
  out.push_back(&fusion_bias);
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto* t : z.tensors()) t->setZero();
  return z;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto* t : tensors()) count += static_cast<std::size_t>(t->size());
  return count;
}

ModelParams init_params(std::span<const int> view_input_dims, const TrainConfig& config, Rng& rng) {
  config.validate();
  if (view_input_dims.empty()) throw ParameterError("model needs at least one view");
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = rng.uniform(-limit, limit);
    return w;
  };
  ModelParams p;
  for (int input_dim : view_input_dims) {
    if (input_dim < 1) throw ParameterError("view input width must be >= 1");
    std::vector<Eigen::MatrixXd> layers;
    int in = input_dim;
    for (int k = 0; k < config.layers; ++k) {
      const int out = k + 1 == config.layers ? config.output_dim : config.hidden_dim;
      layers.push_back(glorot(out, 2 * in));
      in = out;
    }
    p.layer_weights.push_back(std::move(layers));
  }
  const auto fused = static_cast<Eigen::Index>(view_input_dims.size()) * config.output_dim;
  p.fusion_weight = glorot(config.output_dim, fused);
  p.fusion_bias = Eigen::MatrixXd::Zero(config.output_dim, 1);
  return p;
}

NodeMatrix aggregate_layer(const NodeMatrix& input, const NeighborSample& sample,
                           const Eigen::MatrixXd& weight, bool relu, LayerCache* cache) {
  const Eigen::Index n = input.rows();
  const Eigen::Index d = input.cols();
  if (static_cast<Eigen::Index>(sample.nodes.size()) != n) {
    throw DimensionError("neighbor sample covers " + std::to_string(sample.nodes.size()) +
                         " nodes, layer input has " + std::to_string(n));
  }
  if (weight.cols() != 2 * d) {
    throw DimensionError("layer weight expects input width " + std::to_string(weight.cols() / 2) +
                         ", got " + std::to_string(d));
  }

  NodeMatrix aggregated = NodeMatrix::Zero(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nbrs = sample.nodes[static_cast<std::size_t>(i)];
    const auto& w = sample.weights[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < nbrs.size(); ++t) aggregated.row(i) += w[t] * input.row(nbrs[t]);
  }

  NodeMatrix activation = input * weight.leftCols(d).transpose() + aggregated * weight.rightCols(d).transpose();
  if (relu) activation = activation.cwiseMax(0.0);
  Eigen::VectorXd norm = (activation.rowwise().squaredNorm().array() + kNormEpsilon).sqrt();
  NodeMatrix output = norm.cwiseInverse().asDiagonal() * activation;

  for (Eigen::Index i = 0; i < n; ++i) {
    if (!output.row(i).allFinite()) {
      throw NumericError("non-finite layer output at node " + std::to_string(i));
    }
  }
  if (cache) {
    cache->input = input;
    cache->aggregated = std::move(aggregated);
    cache->activation = std::move(activation);
    cache->norm = std::move(norm);
    cache->output = output;
    cache->relu = relu;
  }
  return output;
}

NodeMatrix fuse_views(std::span<const NodeMatrix> views, const Eigen::MatrixXd& weight,
                      const Eigen::MatrixXd& bias, FusionCache* cache) {
  if (views.empty()) throw DimensionError("fusion needs at least one view");
  const Eigen::Index n = views.front().rows();
  Eigen::Index width = 0;
  for (const auto& v : views) {
    if (v.rows() != n) throw DimensionError("views disagree on node count");
    width += v.cols();
  }
  if (weight.cols() != width) {
    throw DimensionError("fusion weight expects width " + std::to_string(weight.cols()) + ", views give " +
                         std::to_string(width));
  }
  if (bias.rows() != weight.rows() || bias.cols() != 1) throw DimensionError("fusion bias shape mismatch");

  NodeMatrix activated(n, width);
  Eigen::Index offset = 0;
  for (const auto& v : views) {
    activated.middleCols(offset, v.cols()) = v.array().tanh().matrix();
    offset += v.cols();
  }
  NodeMatrix out = activated * weight.transpose();
  out.rowwise() += bias.col(0).transpose();
  if (cache) cache->activated = std::move(activated);
  return out;
}

NodeMatrix forward(const ModelParams& params, std::span<const NodeMatrix> inputs,
                   std::span<const NeighborSample> samples, ForwardCache* cache) {
  if (inputs.size() != params.layer_weights.size()) {
    throw DimensionError("model has " + std::to_string(params.layer_weights.size()) + " views, got " +
                         std::to_string(inputs.size()) + " inputs");
  }
  std::vector<NodeMatrix> outputs;
  if (cache) {
    cache->layers.assign(inputs.size(), {});
    cache->samples.assign(samples.begin(), samples.end());
  }
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    const auto& layers = params.layer_weights[v];
    if (samples.size() != layers.size()) throw DimensionError("one neighbor sample per layer required");
    if (cache) cache->layers[v].resize(layers.size());
    NodeMatrix h = inputs[v];
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const bool relu = k + 1 < layers.size();
      h = aggregate_layer(h, samples[k], layers[k], relu, cache ? &cache->layers[v][k] : nullptr);
    }
    outputs.push_back(std::move(h));
  }
  return fuse_views(outputs, params.fusion_weight, params.fusion_bias, cache ? &cache->fusion : nullptr);
}

namespace {

// Returns d loss / d input and accumulates d loss / d weight.
NodeMatrix layer_backward(const LayerCache& c, const NeighborSample& sample, const Eigen::MatrixXd& weight,
                          const NodeMatrix& d_output, Eigen::MatrixXd& d_weight) {
  const Eigen::Index n = c.input.rows();
  const Eigen::Index d = c.input.cols();
  // Through y = a / sqrt(|a|^2 + eps).
  NodeMatrix d_act(n, c.activation.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = c.norm(i);
    const double proj = c.activation.row(i).dot(d_output.row(i));
    d_act.row(i) = d_output.row(i) / s - c.activation.row(i) * (proj / (s * s * s));
  }
  if (c.relu) d_act = (c.activation.array() > 0.0).select(d_act, 0.0);

  d_weight.leftCols(d) += d_act.transpose() * c.input;
  d_weight.rightCols(d) += d_act.transpose() * c.aggregated;

  NodeMatrix d_input = d_act * weight.leftCols(d);
  const NodeMatrix d_agg = d_act * weight.rightCols(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nbrs = sample.nodes[static_cast<std::size_t>(i)];
    const auto& w = sample.weights[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < nbrs.size(); ++t) d_input.row(nbrs[t]) += w[t] * d_agg.row(i);
  }
  return d_input;
}

}  // namespace

ModelParams backward(const ModelParams& params, const ForwardCache& cache, const NodeMatrix& d_output) {
  ModelParams grad = params.zeros_like();
  const NodeMatrix& t = cache.fusion.activated;
  grad.fusion_weight = d_output.transpose() * t;
  grad.fusion_bias = d_output.colwise().sum().transpose();
  const NodeMatrix d_fused = ((d_output * params.fusion_weight).array() * (1.0 - t.array().square())).matrix();

  Eigen::Index offset = 0;
  for (std::size_t v = 0; v < params.layer_weights.size(); ++v) {
    const auto& layers = params.layer_weights[v];
    const auto& caches = cache.layers.at(v);
    const Eigen::Index width = caches.back().output.cols();
    NodeMatrix d_h = d_fused.middleCols(offset, width);
    offset += width;
    for (std::size_t k = layers.size(); k-- > 0;) {
      d_h = layer_backward(caches[k], cache.samples.at(k), layers[k], d_h, grad.layer_weights[v][k]);
    }
  }
  return grad;
}

}  // namespace structopic
