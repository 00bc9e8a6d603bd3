#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "structopic/graph.hpp"
#include "structopic/rng.hpp"
#include "structopic/topics.hpp"
#include "structopic/walks.hpp"

namespace structopic {

// Node-major dense matrix: one row per node.
using NodeMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrainConfig {
  int output_dim = 64;
  int hidden_dim = 100;
  int layers = 2;
  double learning_rate = 0.005;
  int neighbor_sample = 20;
  int window = 5;
  int negatives = 8;  // q
  int epochs = 20;
  int batch_size = 256;         // positive pairs per optimizer step
  int batches_per_epoch = 20;
  // Stop once the epoch-mean loss improves by less than this fraction.
  // Non-positive (the default) disables early stopping: the sampled epoch
  // loss flattens within a few epochs while the embeddings keep improving.
  double early_stop = 0.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class Ablation {
  kFull,        // feature view on X, structural view on topic features
  kNoFeatures,  // both views on topic features; X is never read
  kConcat,      // one view on [X | topic features], uniform aggregation
};

std::string_view to_string(Ablation ablation);
Ablation parse_ablation(std::string_view name);

enum class Weighting { kTopic, kUniform };

// Structural input per node: [anchor occurrences in D_i / N | R_i].
// Width alpha + K; the anchor part is absent for anchor-free models.
NodeMatrix init_structural_features(const WalkCorpus& corpus, const TopicModel& topics);

// w_j = R_i.R_j / sum_j R_i.R_j over the given neighbors (a multiset).
// Uniform when the sum vanishes or every dot product is equal.
std::vector<double> topic_weights(const Eigen::MatrixXd& r, NodeId i,
                                  std::span<const NodeId> neighbors);

// Sampled neighborhoods for one layer. Nodes with degree >= budget draw
// `budget` distinct neighbors, others draw `budget` with replacement.
// Isolated nodes get an empty list.
struct NeighborSample {
  std::vector<std::vector<NodeId>> nodes;
  std::vector<std::vector<double>> weights;
};

NeighborSample sample_neighbors(const Graph& graph, const Eigen::MatrixXd& r, Weighting weighting,
                                int budget, Rng& rng);

// Per-view GraphSAGE stacks plus the fusion layer
//   h = W_f tanh([h_view0 | h_view1 | ...]) + b_f.
// layer_weights[v][k] maps [h_self | h_agg] (2 d_k) to d_{k+1}.
struct ModelParams {
  std::vector<std::vector<Eigen::MatrixXd>> layer_weights;
  Eigen::MatrixXd fusion_weight;  // output_dim x (views * output_dim)
  Eigen::MatrixXd fusion_bias;    // output_dim x 1

  std::vector<Eigen::MatrixXd*> tensors();
  std::vector<const Eigen::MatrixXd*> tensors() const;
  ModelParams zeros_like() const;
  std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero bias.
ModelParams init_params(std::span<const int> view_input_dims, const TrainConfig& config, Rng& rng);

struct LayerCache {
  NodeMatrix input;
  NodeMatrix aggregated;
  NodeMatrix activation;
  Eigen::VectorXd norm;
  NodeMatrix output;
  bool relu = false;
};

// One aggregation layer: weighted neighbor mean, concat with self, linear
// map, ReLU (hidden) or identity (final), row L2 normalization.
NodeMatrix aggregate_layer(const NodeMatrix& input, const NeighborSample& sample,
                           const Eigen::MatrixXd& weight, bool relu, LayerCache* cache = nullptr);

struct FusionCache {
  NodeMatrix activated;  // tanh of the concatenated views
};

NodeMatrix fuse_views(std::span<const NodeMatrix> views, const Eigen::MatrixXd& weight,
                      const Eigen::MatrixXd& bias, FusionCache* cache = nullptr);

struct ForwardCache {
  std::vector<NeighborSample> samples;          // [layer]
  std::vector<std::vector<LayerCache>> layers;  // [view][layer]
  FusionCache fusion;
};

// samples[k] is shared by every view at layer k.
NodeMatrix forward(const ModelParams& params, std::span<const NodeMatrix> inputs,
                   std::span<const NeighborSample> samples, ForwardCache* cache = nullptr);

ModelParams backward(const ModelParams& params, const ForwardCache& cache, const NodeMatrix& d_output);

struct PositivePair {
  NodeId u;
  NodeId v;
};

struct LossResult {
  double value = 0.0;
  NodeMatrix gradient;  // d loss / d embeddings
};

// Mean over pairs of -log s(h_u.h_v) - sum_t log s(-h_u.h_n), with
// negatives[p * q + t] the t-th negative of pair p.
LossResult negative_sampling_loss(const NodeMatrix& embeddings, std::span<const PositivePair> pairs,
                                  std::span<const NodeId> negatives, int q);

// Negative sampling distribution proportional to degree^0.75.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const Graph& graph, double power = 0.75);
  NodeId sample(Rng& rng) const;
  double probability(NodeId v) const;

 private:
  std::vector<double> cumulative_;
};

// Pairs (walk[p], walk[p+o]) with 0 < |o| <= window from the corpus walks.
class PairSampler {
 public:
  PairSampler(const WalkCorpus& corpus, int window);
  PositivePair sample(Rng& rng) const;
  bool empty() const noexcept { return walks_.empty(); }

 private:
  std::vector<std::span<const NodeId>> walks_;
  int window_;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
};

struct EmbeddingTable {
  NodeMatrix embeddings;
  ModelParams params;
  std::vector<EpochLog> log;
};

// View inputs for an ablation; X is only read for kFull and kConcat.
std::vector<NodeMatrix> view_inputs(const Graph& graph, const NodeMatrix& structural, Ablation ablation);

EmbeddingTable train(const Graph& graph, const TopicModel& topics, const WalkCorpus& corpus,
                     const TrainConfig& config, Ablation ablation);

void save_embeddings(const std::filesystem::path& path, const Graph& graph, const NodeMatrix& embeddings,
                     std::string_view header);
NodeMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace structopic
