#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "structopic/walks.hpp"

namespace structopic {

// ---------------------------------------------------------------------------
// Non-negative matrix factorization M ~ H Z by multiplicative updates.

struct NmfOptions {
  int rank = 5;             // alpha
  int max_iters = 500;
  double tolerance = 1e-6;  // stop when the relative objective change falls below
  std::uint64_t seed = 0;
};

struct NmfFactors {
  Eigen::MatrixXd h;  // |W| x alpha
  Eigen::MatrixXd z;  // alpha x |W|
  // Squared Frobenius residual; entry 0 is the initial point.
  std::vector<double> objective_trace;
  bool converged = false;
};

NmfFactors nmf_factorize(const SparseMatrix& m, const NmfOptions& options);
NmfFactors nmf_factorize(const Eigen::MatrixXd& m, const NmfOptions& options);

// Squared Frobenius norm of M - H Z, evaluated without forming H Z densely.
double nmf_objective(const SparseMatrix& m, const Eigen::MatrixXd& h, const Eigen::MatrixXd& z);

// ---------------------------------------------------------------------------
// Anchors.

struct AnchorSet {
  std::vector<int> ids;

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }
};

// Row-wise argmax of Z. When a row's argmax is already taken, the row's
// next-largest unused column is used instead.
AnchorSet select_anchors(const Eigen::MatrixXd& z);
inline AnchorSet select_anchors(const NmfFactors& factors) { return select_anchors(factors.z); }

// ---------------------------------------------------------------------------
// Walk-topic recovery: simplex-constrained KL regression of every normalized
// co-occurrence row onto the normalized anchor rows.

struct KlOptions {
  double initial_step = 1.0;  // halved whenever a step fails to decrease KL
  int max_iters = 500;
  double tolerance = 1e-7;    // on the simplex-projected gradient norm
  unsigned threads = 1;
};

struct SimplexFit {
  Eigen::VectorXd coefficients;    // on the simplex
  std::vector<double> kl_trace;    // objective after every accepted step
  int iterations = 0;
};

// Minimizes KL(target || coefficients^T basis) over the simplex by
// exponentiated gradient. `target` is a probability vector given as sparse
// (index, value) pairs; `basis` rows are probability vectors. Columns where
// every basis row is zero contribute a constant and are skipped.
SimplexFit simplex_kl_regression(std::span<const std::pair<int, double>> target,
                                 const Eigen::MatrixXd& basis, const KlOptions& options);

struct WalkTopicFit {
  Eigen::MatrixXd u;             // K x |W|, rows on the simplex
  Eigen::MatrixXd coefficients;  // |W| x K, p(topic | walk)
  std::vector<int> uniform_rows; // walks with an all-zero co-occurrence row
};

WalkTopicFit recover_walk_topics(const SparseMatrix& m, const AnchorSet& anchors, int k,
                                 const KlOptions& options = {});

// R = Y U^+, negatives clamped, rows renormalized; all-zero rows become
// uniform. Throws NumericError naming two dependent topics when U is rank
// deficient.
Eigen::MatrixXd recover_node_topics(const SparseMatrix& y, const Eigen::MatrixXd& u);
Eigen::MatrixXd recover_node_topics(const Eigen::MatrixXd& y, const Eigen::MatrixXd& u);

// ---------------------------------------------------------------------------
// Full models.

struct TopicModel {
  Eigen::MatrixXd u;  // K x |W|
  Eigen::MatrixXd r;  // |V| x K
  AnchorSet anchors;  // empty for the no-anchor baseline

  int k() const noexcept { return static_cast<int>(u.rows()); }
};

enum class NmfInput {
  kRaw,            // factorize M itself
  kRowNormalized,  // factorize the row-normalized M
};

struct AnchorModelOptions {
  int k = 5;
  int nmf_iters = 500;
  double nmf_tolerance = 1e-6;
  NmfInput nmf_input = NmfInput::kRaw;
  KlOptions kl;
  std::uint64_t seed = 0;
};

struct AnchorFit {
  TopicModel model;
  NmfFactors nmf;
  std::vector<int> uniform_rows;
};

// Anchors from NMF of M, U by KL recovery, R = Y U^+. alpha = K.
AnchorFit fit_anchor_model(const SparseMatrix& y, const SparseMatrix& m,
                           const AnchorModelOptions& options);

struct LdaOptions {
  double doc_prior = 0.1;     // symmetric Dirichlet on node-topic
  double word_prior = 0.01;   // symmetric Dirichlet on topic-walk
  int sweeps = 200;
};

// Plain LDA on the node documents by collapsed Gibbs sampling; the
// no-anchor ablation. Documents are reconstructed from the counts in Y.
TopicModel recover_no_anchor(const SparseMatrix& y, int k, std::uint64_t seed,
                             const LdaOptions& options = {});

// Row-normalized copy; zero rows stay zero.
SparseMatrix row_normalized(const SparseMatrix& m);

double mean_row_entropy(const Eigen::MatrixXd& rows);

}  // namespace structopic
