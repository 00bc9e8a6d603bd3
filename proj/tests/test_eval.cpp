#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "structopic/error.hpp"
#include "structopic/eval.hpp"

using namespace structopic;

namespace {

std::vector<double> random_scores(std::mt19937_64& gen, int n, int levels) {
  // Few levels so ties are common.
  std::uniform_int_distribution<int> d(0, levels - 1);
  std::vector<double> s(static_cast<std::size_t>(n));
  for (auto& x : s) x = d(gen);
  return s;
}

std::vector<int> block_labels(int n, int classes) {
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i % classes;
  return y;
}

}  // namespace

TEST(Auc, Examples) {
  const std::vector<double> pos(5, 1.0), neg(5, -1.0), flat(5, 0.0);
  EXPECT_EQ(auc_score(pos, neg), 1.0);
  EXPECT_EQ(recall_at_half(pos, neg), 1.0);
  EXPECT_EQ(auc_score(flat, flat), 0.5);
  EXPECT_EQ(auc_score(neg, pos), 0.0);
  EXPECT_THROW(auc_score({}, neg), ParameterError);
}

TEST(Auc, MatchesPairCountingOracle) {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_scores(gen, 1 + t % 17, 6);
    const auto n = random_scores(gen, 1 + t % 13, 6);
    EXPECT_NEAR(auc_score(p, n), oracle::auc(p, n), 1e-12);
  }
}

TEST(Auc, InvariantUnderIncreasingTransform) {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    auto p = random_scores(gen, 20, 9);
    auto n = random_scores(gen, 20, 9);
    const double before = auc_score(p, n);
    for (auto* v : {&p, &n}) {
      for (auto& x : *v) x = std::exp(3.0 * x) - 7.0;
    }
    EXPECT_EQ(auc_score(p, n), before);
  }
}

TEST(RecallAtHalf, TiedBlockIsProRata) {
  // Top half is 2 of 4 scores; all tied, so half the positives count.
  const std::vector<double> p{1.0, 1.0}, n{1.0, 1.0};
  EXPECT_DOUBLE_EQ(recall_at_half(p, n), 0.5);
  const std::vector<double> p2{3.0, 1.0}, n2{1.0, 0.0};
  EXPECT_DOUBLE_EQ(recall_at_half(p2, n2), 0.75);
}

TEST(RecallAtHalf, EqualsTopHalfPrecisionWithoutTies) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> d;
  for (int t = 0; t < 100; ++t) {
    const int k = 1 + t % 20;
    std::vector<double> p(static_cast<std::size_t>(k)), n(static_cast<std::size_t>(k));
    for (auto& x : p) x = d(gen) + 0.5;
    for (auto& x : n) x = d(gen);
    // With P = N the top half has exactly P slots, so recall is precision.
    EXPECT_DOUBLE_EQ(recall_at_half(p, n), oracle::recall_top_half(p, n));
  }
}

TEST(EvalLinks, FractionAndCounts) {
  const auto g = generate_synthetic({.n = 3});
  const NodeMatrix e = NodeMatrix::Random(g.num_nodes(), 8);
  const auto full = eval_links(g, e, 1.0, 1);
  EXPECT_EQ(full.num_pos, g.num_edges());
  EXPECT_EQ(full.num_neg, full.num_pos);
  const auto half = eval_links(g, e, 0.5, 1);
  EXPECT_EQ(half.num_pos, (g.num_edges() + 1) / 2);
  EXPECT_GE(half.auc, 0.0);
  EXPECT_LE(half.auc, 1.0);
  EXPECT_THROW(eval_links(g, e, 0.0, 1), ParameterError);
  EXPECT_THROW(eval_links(g, e, 1.5, 1), ParameterError);
  EXPECT_THROW(eval_links(g, NodeMatrix::Zero(3, 2), 1.0, 1), DimensionError);
}

TEST(EvalLinks, DenseGraphRefuses) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < 6; ++i) {
    for (NodeId j = i + 1; j < 6; ++j) edges.emplace_back(i, j);
  }
  const Graph k6(6, edges);
  EXPECT_THROW(eval_links(k6, NodeMatrix::Random(6, 2), 1.0, 1), ParameterError);
}

TEST(EvalLinks, PerfectEmbeddingsScoreOne) {
  // Two disjoint cliques, one-hot community embeddings.
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId c = 0; c < 2; ++c) {
    for (NodeId i = 0; i < 5; ++i) {
      for (NodeId j = i + 1; j < 5; ++j) edges.emplace_back(5 * c + i, 5 * c + j);
    }
  }
  const Graph g(10, edges);
  NodeMatrix e = NodeMatrix::Zero(10, 2);
  for (NodeId v = 0; v < 10; ++v) e(v, v / 5) = 1.0;
  const auto r = eval_links(g, e, 1.0, 4);
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.recall_at_half, 1.0);
}

TEST(EvalLinks, RandomEmbeddingsAreAtChance) {
  const auto g = generate_synthetic({.n = 5});
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d;
    NodeMatrix e(g.num_nodes(), 64);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = d(gen);
    sum += eval_links(g, e, 1.0, seed).auc;
  }
  EXPECT_NEAR(sum / 10.0, 0.5, 0.05);
}

TEST(EvalLinks, DeterministicGivenSeed) {
  const auto g = generate_synthetic({.n = 2});
  const NodeMatrix e = NodeMatrix::Random(g.num_nodes(), 4);
  const auto a = eval_links(g, e, 0.7, 9);
  const auto b = eval_links(g, e, 0.7, 9);
  EXPECT_EQ(a.auc, b.auc);
  EXPECT_EQ(a.recall_at_half, b.recall_at_half);
}

TEST(F1, HandValues) {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  const std::vector<int> pred{0, 1, 1, 1, 2, 0};
  // Class 0: tp 1 fp 1 fn 1 -> 0.5; class 1: tp 2 fp 1 -> 0.8; class 2: tp 1 fn 1 -> 2/3.
  EXPECT_NEAR(macro_f1(truth, pred), (0.5 + 0.8 + 2.0 / 3.0) / 3.0, 1e-12);
  EXPECT_NEAR(micro_f1(truth, pred), 4.0 / 6.0, 1e-12);
  EXPECT_EQ(macro_f1(truth, truth), 1.0);
  EXPECT_THROW(macro_f1(truth, std::vector<int>{0}), DimensionError);
}

TEST(Logistic, SeparableOneHot) {
  const int n = 60;
  const auto y = block_labels(n, 3);
  NodeMatrix x = NodeMatrix::Zero(n, 3);
  for (int i = 0; i < n; ++i) x(i, y[static_cast<std::size_t>(i)]) = 1.0;
  LogisticRegression lr;
  lr.fit(x, y, 3);
  EXPECT_EQ(lr.predict(x), y);
  EXPECT_LT(lr.gradient_norm(), 1e-5);
  const auto r = eval_classify(x, y, 0.3, 1);
  EXPECT_EQ(r.macro_f1, 1.0);
  EXPECT_EQ(r.micro_f1, 1.0);
  EXPECT_EQ(r.runs, 10);
}

TEST(Logistic, ConstantEmbeddingsAreAtChance) {
  const auto y = block_labels(200, 2);
  const NodeMatrix x = NodeMatrix::Constant(200, 4, 0.3);
  const auto r = eval_classify(x, y, 0.5, 2);
  EXPECT_NEAR(r.micro_f1, 0.5, 0.05);
}

TEST(Logistic, ConvergesOnOverlappingClasses) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> d;
  const int n = 90;
  NodeMatrix x(n, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = d(gen);
  const auto y = block_labels(n, 3);
  for (int i = 0; i < n; ++i) x(i, 0) += 4.0 * y[static_cast<std::size_t>(i)];
  LogisticRegression lr;
  lr.fit(x, y, 3);
  EXPECT_LT(lr.gradient_norm(), 1e-5);
  EXPECT_LT(lr.iterations(), 1000);
  EXPECT_GT(micro_f1(y, lr.predict(x)), 0.85);
}

TEST(Classify, ErrorsAndDeterminism) {
  const auto y = block_labels(40, 2);
  const NodeMatrix x = NodeMatrix::Random(40, 3);
  const auto a = eval_classify(x, y, 0.3, 7, 3);
  const auto b = eval_classify(x, y, 0.3, 7, 3);
  EXPECT_EQ(a.macro_f1, b.macro_f1);
  EXPECT_EQ(a.micro_f1, b.micro_f1);
  EXPECT_EQ(a.train_fraction, 0.3);
  EXPECT_THROW(eval_classify(x, y, 1.0, 7), ParameterError);
  EXPECT_THROW(eval_classify(x, y, 0.3, 7, 0), ParameterError);
  EXPECT_THROW(eval_classify(x, std::vector<int>(39, 0), 0.3, 7), DimensionError);
}

TEST(Projection, TwoDimensionalPointsAreRotated) {
  NodeMatrix p(5, 2);
  p << 1, 2, -3, 0.5, 0.2, -1, 2.5, 1.5, -0.7, -3;
  p.rowwise() -= p.colwise().mean();
  const auto out = project_2d(p);
  EXPECT_FALSE(out.rank_deficient);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      EXPECT_NEAR((out.coords.row(i) - out.coords.row(j)).norm(), (p.row(i) - p.row(j)).norm(), 1e-9);
    }
  }
}

TEST(Projection, VarianceOrderSignAndRank) {
  NodeMatrix e = NodeMatrix::Random(30, 6);
  e.col(2) *= 5.0;
  const auto out = project_2d(e);
  const auto centered = (out.coords.rowwise() - out.coords.colwise().mean()).eval();
  EXPECT_GE(centered.col(0).squaredNorm(), centered.col(1).squaredNorm());
  EXPECT_LT((project_2d(-e).coords + out.coords).cwiseAbs().maxCoeff(), 1e-9);

  NodeMatrix line(4, 3);
  line << 0, 0, 0, 1, 2, 3, 2, 4, 6, -1, -2, -3;
  const auto flat = project_2d(line);
  EXPECT_TRUE(flat.rank_deficient);
  EXPECT_EQ(flat.coords.col(1), Eigen::VectorXd::Zero(4));
  EXPECT_THROW(project_2d(NodeMatrix::Zero(3, 1)), ParameterError);
}

TEST(ClusterPurity, HandValues) {
  const std::vector<int> clusters{0, 0, 0, 1, 1, 2};
  const std::vector<int> labels{5, 5, 6, 6, 6, 5};
  EXPECT_DOUBLE_EQ(cluster_purity(clusters, labels), 5.0 / 6.0);
  EXPECT_EQ(cluster_purity(labels, labels), 1.0);
  const Eigen::MatrixXd m = (Eigen::MatrixXd(2, 3) << 0.1, 0.7, 0.2, 0.5, 0.5, 0.0).finished();
  EXPECT_EQ(argmax_rows(m), (std::vector<int>{1, 0}));
}
