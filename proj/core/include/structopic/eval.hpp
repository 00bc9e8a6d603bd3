#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "structopic/gcn.hpp"
#include "structopic/graph.hpp"

namespace structopic {

// Link reconstruction: sampled true edges vs. an equal number of uniform
// non-edges, scored by embedding inner product. Edges stay in training.
struct LinkEvalReport {
  double auc = 0.0;
  double recall_at_half = 0.0;  // recall of true edges within the top half of scores
  std::size_t num_pos = 0;
  std::size_t num_neg = 0;
};

// Rank-statistic AUC, tied scores get mid ranks.
double auc_score(std::span<const double> positive, std::span<const double> negative);

// Recall of positives among the top (P + N) / 2 scores. A tied block that
// straddles the cut contributes its positives pro rata.
double recall_at_half(std::span<const double> positive, std::span<const double> negative);

LinkEvalReport eval_links(const Graph& graph, const NodeMatrix& embeddings, double fraction,
                          std::uint64_t seed);

struct LogisticOptions {
  double l2 = 1.0;        // penalty 0.5 * l2 * |W|^2 against the summed log loss
  int max_iters = 1000;
  double tolerance = 1e-5;  // on the gradient norm of the per-sample objective
};

// Multinomial logistic regression trained by L-BFGS; the bias is not
// penalized.
class LogisticRegression {
 public:
  explicit LogisticRegression(LogisticOptions options = {}) : options_(options) {}

  void fit(const NodeMatrix& x, std::span<const int> labels, int num_classes);
  std::vector<int> predict(const NodeMatrix& x) const;

  int iterations() const noexcept { return iterations_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  LogisticOptions options_;
  Eigen::MatrixXd weights_;  // classes x (features + 1), last column is the bias
  int iterations_ = 0;
  double gradient_norm_ = 0.0;
};

double macro_f1(std::span<const int> truth, std::span<const int> predicted);
double micro_f1(std::span<const int> truth, std::span<const int> predicted);

struct ClassEvalReport {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  double train_fraction = 0.0;
  int runs = 0;
};

// Stratified train/test splits, logistic regression, F1 on the held-out
// nodes, averaged over `runs` splits.
ClassEvalReport eval_classify(const NodeMatrix& embeddings, std::span<const int> labels,
                              double train_fraction, std::uint64_t seed, int runs = 10,
                              const LogisticOptions& options = {});

struct Projection {
  NodeMatrix coords;  // n x 2
  bool rank_deficient = false;
};

// PCA onto the top two principal axes. Each axis is signed so its
// largest-magnitude loading is positive.
Projection project_2d(const NodeMatrix& embeddings);

std::vector<int> argmax_rows(const Eigen::MatrixXd& m);

// Fraction of nodes whose cluster's majority label matches their own.
double cluster_purity(std::span<const int> clusters, std::span<const int> labels);

}  // namespace structopic
