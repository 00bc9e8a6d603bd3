#include <algorithm>
#include <cmath>
#include <string>

#include "structopic/error.hpp"
#include "structopic/gcn.hpp"
#include "structopic/io.hpp"
#include "text.hpp"

namespace structopic {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Adam {
  ModelParams m;
  ModelParams v;
  long step = 0;

  explicit Adam(const ModelParams& params) : m(params.zeros_like()), v(params.zeros_like()) {}

  void apply(ModelParams& params, const ModelParams& grad, const TrainConfig& c) {
    ++step;
    const double bias1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(step));
    auto p = params.tensors();
    auto g = grad.tensors();
    auto mt = m.tensors();
    auto vt = v.tensors();
    for (std::size_t t = 0; t < p.size(); ++t) {
      *mt[t] = c.adam_beta1 * *mt[t] + (1.0 - c.adam_beta1) * *g[t];
      *vt[t] = c.adam_beta2 * *vt[t] + (1.0 - c.adam_beta2) * g[t]->cwiseAbs2();
      p[t]->array() -= c.learning_rate * (mt[t]->array() / bias1) /
                       ((vt[t]->array() / bias2).sqrt() + c.adam_epsilon);
    }
  }
};

}  // namespace

void TrainConfig::validate() const {
  if (output_dim < 1 || hidden_dim < 1 || layers < 1) throw ParameterError("layer widths and depth must be positive");
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be > 0");
  if (neighbor_sample < 1 || window < 1 || negatives < 0 || epochs < 1 || batch_size < 1 ||
      batches_per_epoch < 1) {
    throw ParameterError("sample sizes, window, epochs and batch sizes must be positive (q >= 0)");
  }
}

std::string_view to_string(Ablation ablation) {
  switch (ablation) {
    case Ablation::kFull: return "full";
    case Ablation::kNoFeatures: return "nf";
    case Ablation::kConcat: return "concat";
  }
  return "full";
}

Ablation parse_ablation(std::string_view name) {
  if (name == "full") return Ablation::kFull;
  if (name == "nf") return Ablation::kNoFeatures;
  if (name == "concat") return Ablation::kConcat;
  throw ParameterError("unknown ablation '" + std::string(name) + "' (expected full, nf or concat)");
}

LossResult negative_sampling_loss(const NodeMatrix& embeddings, std::span<const PositivePair> pairs,
                                  std::span<const NodeId> negatives, int q) {
  if (q < 0) throw ParameterError("negative count q must be >= 0");
  if (negatives.size() != pairs.size() * static_cast<std::size_t>(q)) {
    throw DimensionError("expected " + std::to_string(pairs.size() * static_cast<std::size_t>(q)) +
                         " negatives, got " + std::to_string(negatives.size()));
  }
  LossResult out;
  out.gradient = NodeMatrix::Zero(embeddings.rows(), embeddings.cols());
  if (pairs.empty()) return out;
  const double scale = 1.0 / static_cast<double>(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [u, v] = pairs[p];
    const double x = embeddings.row(u).dot(embeddings.row(v));
    out.value += softplus(-x);
    const double gx = (sigmoid(x) - 1.0) * scale;
    out.gradient.row(u) += gx * embeddings.row(v);
    out.gradient.row(v) += gx * embeddings.row(u);
    for (int t = 0; t < q; ++t) {
      const NodeId neg = negatives[p * static_cast<std::size_t>(q) + static_cast<std::size_t>(t)];
      const double y = embeddings.row(u).dot(embeddings.row(neg));
      out.value += softplus(y);
      const double gy = sigmoid(y) * scale;
      out.gradient.row(u) += gy * embeddings.row(neg);
      out.gradient.row(neg) += gy * embeddings.row(u);
    }
  }
  out.value *= scale;
  return out;
}

NoiseDistribution::NoiseDistribution(const Graph& graph, double power) {
  cumulative_.reserve(static_cast<std::size_t>(graph.num_nodes()));
  double total = 0.0;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    total += std::pow(static_cast<double>(graph.degree(v)), power);
    cumulative_.push_back(total);
  }
  if (!(total > 0.0)) throw ParameterError("noise distribution needs at least one edge");
  for (auto& c : cumulative_) c /= total;
}

NodeId NoiseDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<NodeId>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                      static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
}

double NoiseDistribution::probability(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return cumulative_[i] - (i ? cumulative_[i - 1] : 0.0);
}

PairSampler::PairSampler(const WalkCorpus& corpus, int window) : window_(window) {
  if (window < 1) throw ParameterError("co-occurrence window must be >= 1");
  for (const auto& path : corpus.paths) {
    if (path.size() >= 2) walks_.emplace_back(path);
  }
}

PositivePair PairSampler::sample(Rng& rng) const {
  // Walks revisit nodes, so a draw can pair a node with itself; redraw then.
  for (int attempt = 0; attempt < 64; ++attempt) {
    const auto& walk = walks_[rng.uniform_index(walks_.size())];
    const auto len = static_cast<std::int64_t>(walk.size());
    const auto p = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(len)));
    const std::int64_t lo = std::max<std::int64_t>(0, p - window_);
    const std::int64_t hi = std::min<std::int64_t>(len - 1, p + window_);
    const auto span = static_cast<std::uint64_t>(hi - lo);  // candidates excluding p
    auto o = lo + static_cast<std::int64_t>(rng.uniform_index(span));
    if (o >= p) ++o;
    const PositivePair pair{walk[static_cast<std::size_t>(p)], walk[static_cast<std::size_t>(o)]};
    if (pair.u != pair.v) return pair;
  }
  const auto& walk = walks_.front();
  return {walk[0], walk[1]};
}

std::vector<NodeMatrix> view_inputs(const Graph& graph, const NodeMatrix& structural, Ablation ablation) {
  switch (ablation) {
    case Ablation::kFull:
      return {NodeMatrix(graph.features()), structural};
    case Ablation::kNoFeatures:
      return {structural, structural};
    case Ablation::kConcat: {
      const auto& x = graph.features();
      NodeMatrix joined(x.rows(), x.cols() + structural.cols());
      joined << x, structural;
      return {std::move(joined)};
    }
  }
  return {};
}

EmbeddingTable train(const Graph& graph, const TopicModel& topics, const WalkCorpus& corpus,
                     const TrainConfig& config, Ablation ablation) {
  config.validate();
  if (ablation != Ablation::kNoFeatures && !graph.has_features()) {
    throw ConfigError("ablation '" + std::string(to_string(ablation)) +
                      "' needs node features; load a features file or use 'nf'");
  }
  if (corpus.num_nodes() != static_cast<std::size_t>(graph.num_nodes())) {
    throw DimensionError("walk corpus and graph disagree on node count");
  }
  const NodeMatrix structural = init_structural_features(corpus, topics);
  const auto inputs = view_inputs(graph, structural, ablation);
  const Weighting weighting = ablation == Ablation::kConcat ? Weighting::kUniform : Weighting::kTopic;

  Rng rng(config.seed, 0x6763);
  std::vector<int> dims;
  for (const auto& x : inputs) dims.push_back(static_cast<int>(x.cols()));
  EmbeddingTable table;
  table.params = init_params(dims, config, rng);
  Adam adam(table.params);
  const NoiseDistribution noise(graph);
  const PairSampler pairs(corpus, config.window);
  if (pairs.empty()) throw ConfigError("no walks with at least one step to draw positive pairs from");

  auto draw_samples = [&] {
    std::vector<NeighborSample> samples;
    for (int k = 0; k < config.layers; ++k) {
      samples.push_back(sample_neighbors(graph, topics.r, weighting, config.neighbor_sample, rng));
    }
    return samples;
  };

  std::vector<PositivePair> batch(static_cast<std::size_t>(config.batch_size));
  std::vector<NodeId> negatives(batch.size() * static_cast<std::size_t>(config.negatives));
  double previous = 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (int b = 0; b < config.batches_per_epoch; ++b) {
      const auto samples = draw_samples();
      ForwardCache cache;
      const NodeMatrix out = forward(table.params, inputs, samples, &cache);
      for (auto& p : batch) p = pairs.sample(rng);
      for (auto& n : negatives) n = noise.sample(rng);
      const auto loss = negative_sampling_loss(out, batch, negatives, config.negatives);
      if (!std::isfinite(loss.value)) throw NumericError("loss became non-finite in epoch " + std::to_string(epoch));
      const auto grad = backward(table.params, cache, loss.gradient);
      adam.apply(table.params, grad, config);
      total += loss.value;
    }
    const double mean = total / config.batches_per_epoch;
    table.log.push_back({epoch, mean});
    if (epoch > 0 && config.early_stop > 0.0 && (previous - mean) < config.early_stop * std::abs(previous)) break;
    previous = mean;
  }

  const auto samples = draw_samples();
  table.embeddings = forward(table.params, inputs, samples);
  return table;
}

void save_embeddings(const std::filesystem::path& path, const Graph& graph, const NodeMatrix& embeddings,
                     std::string_view header) {
  if (embeddings.rows() != graph.num_nodes()) throw DimensionError("embedding rows != num_nodes");
  io::write_dense_tsv(path, Eigen::MatrixXd(embeddings), header, graph.original_ids());
}

NodeMatrix load_embeddings(const std::filesystem::path& path) { return io::read_dense_tsv(path, true); }

}  // namespace structopic
