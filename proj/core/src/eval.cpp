#include "structopic/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

#include "structopic/error.hpp"
#include "structopic/rng.hpp"

namespace structopic {

double auc_score(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) throw ParameterError("AUC needs positives and negatives");
  std::vector<std::pair<double, bool>> all;
  all.reserve(positive.size() + negative.size());
  for (double s : positive) all.emplace_back(s, true);
  for (double s : negative) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].second) positive_rank_sum += midrank;
    }
    i = j;
  }
  const auto p = static_cast<double>(positive.size());
  const auto n = static_cast<double>(negative.size());
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double recall_at_half(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty()) throw ParameterError("recall needs positives");
  std::vector<std::pair<double, bool>> all;
  for (double s : positive) all.emplace_back(s, true);
  for (double s : negative) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const std::size_t cut = all.size() / 2;
  if (cut == 0) return 0.0;
  const double threshold = all[cut - 1].first;
  double hits = 0.0;
  std::size_t above = 0;
  std::size_t tied = 0;
  std::size_t tied_pos = 0;
  for (const auto& [score, is_pos] : all) {
    if (score > threshold) {
      ++above;
      hits += is_pos ? 1.0 : 0.0;
    } else if (score == threshold) {
      ++tied;
      tied_pos += is_pos ? 1 : 0;
    }
  }
  hits += static_cast<double>(tied_pos) * static_cast<double>(cut - above) / static_cast<double>(tied);
  return hits / static_cast<double>(positive.size());
}

LinkEvalReport eval_links(const Graph& graph, const NodeMatrix& embeddings, double fraction,
                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ParameterError("edge fraction must lie in (0, 1]");
  if (embeddings.rows() != graph.num_nodes()) throw DimensionError("embedding rows != num_nodes");
  auto edges = graph.edges();
  if (edges.empty()) throw ParameterError("graph has no edges to reconstruct");
  Rng rng(seed, 0x6c696e6b);
  rng.shuffle(edges);
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(edges.size()) - 1e-9));
  edges.resize(std::max<std::size_t>(1, count));

  const auto n = static_cast<std::uint64_t>(graph.num_nodes());
  std::set<std::pair<NodeId, NodeId>> chosen;
  std::vector<std::pair<NodeId, NodeId>> non_edges;
  const std::size_t budget = 100 * edges.size();
  std::size_t attempts = 0;
  while (non_edges.size() < edges.size()) {
    if (++attempts > budget) {
      throw ParameterError("graph too dense: could not sample " + std::to_string(edges.size()) +
                           " non-edges in " + std::to_string(budget) + " attempts");
    }
    auto u = static_cast<NodeId>(rng.uniform_index(n));
    auto v = static_cast<NodeId>(rng.uniform_index(n));
    if (u == v || graph.has_edge(u, v)) continue;
    if (u > v) std::swap(u, v);
    if (!chosen.emplace(u, v).second) continue;
    non_edges.emplace_back(u, v);
  }

  std::vector<double> pos;
  std::vector<double> neg;
  for (auto [u, v] : edges) pos.push_back(embeddings.row(u).dot(embeddings.row(v)));
  for (auto [u, v] : non_edges) neg.push_back(embeddings.row(u).dot(embeddings.row(v)));
  LinkEvalReport report;
  report.num_pos = pos.size();
  report.num_neg = neg.size();
  report.auc = auc_score(pos, neg);
  report.recall_at_half = recall_at_half(pos, neg);
  return report;
}

namespace {

// Per-sample objective and gradient of the softmax regression.
double logistic_objective(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, std::span<const int> y,
                          double l2, Eigen::MatrixXd& grad) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols() - 1;
  Eigen::MatrixXd logits = x * w.transpose();  // n x C
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    logits.row(i).array() -= mx;
    const double z = logits.row(i).array().exp().sum();
    loss += std::log(z) - logits(i, y[static_cast<std::size_t>(i)]);
    logits.row(i) = logits.row(i).array().exp() / z;
    logits(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  }
  grad = logits.transpose() * x;
  grad.leftCols(d) += l2 * w.leftCols(d);
  loss += 0.5 * l2 * w.leftCols(d).squaredNorm();
  grad /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

Eigen::MatrixXd with_bias(const NodeMatrix& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.leftCols(x.cols()) = x;
  out.col(x.cols()).setOnes();
  return out;
}

}  // namespace

void LogisticRegression::fit(const NodeMatrix& x_raw, std::span<const int> labels, int num_classes) {
  if (static_cast<std::size_t>(x_raw.rows()) != labels.size()) throw DimensionError("label count != sample count");
  if (num_classes < 1) throw ParameterError("need at least one class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw ParameterError("label " + std::to_string(y) + " out of range");
  }
  const Eigen::MatrixXd x = with_bias(x_raw);
  const Eigen::Index size = num_classes * x.cols();
  weights_ = Eigen::MatrixXd::Zero(num_classes, x.cols());

  auto flat = [&](Eigen::MatrixXd& m) { return Eigen::Map<Eigen::VectorXd>(m.data(), size); };
  Eigen::MatrixXd grad_m;
  double f = logistic_objective(weights_, x, labels, options_.l2, grad_m);
  Eigen::VectorXd g = flat(grad_m);

  constexpr int kMemory = 10;
  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  iterations_ = 0;
  gradient_norm_ = g.norm();
  Eigen::MatrixXd trial(weights_.rows(), weights_.cols());
  while (iterations_ < options_.max_iters && gradient_norm_ >= options_.tolerance) {
    ++iterations_;
    // Two-loop recursion.
    Eigen::VectorXd dir = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = s_hist[i].dot(dir) / y_hist[i].dot(s_hist[i]);
      dir -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    else dir /= std::max(1.0, g.norm());
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = y_hist[i].dot(dir) / y_hist[i].dot(s_hist[i]);
      dir += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      s_hist.clear();
      y_hist.clear();
      dir = -g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }

    double step = 1.0;
    double f_new = f;
    Eigen::MatrixXd grad_new;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      trial = weights_;
      flat(trial) += step * dir;
      f_new = logistic_objective(trial, x, labels, options_.l2, grad_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Eigen::VectorXd g_new = flat(grad_new);
    Eigen::VectorXd s = step * dir;
    Eigen::VectorXd yv = g_new - g;
    if (s.dot(yv) > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
      }
    }
    weights_ = trial;
    f = f_new;
    g = std::move(g_new);
    gradient_norm_ = g.norm();
  }
}

std::vector<int> LogisticRegression::predict(const NodeMatrix& x_raw) const {
  const Eigen::MatrixXd logits = with_bias(x_raw) * weights_.transpose();
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double macro_f1(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("prediction count mismatch");
  std::map<int, std::array<double, 3>> counts;  // tp, fp, fn
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto& t = counts[truth[i]];
    auto& p = counts[predicted[i]];
    if (truth[i] == predicted[i]) {
      t[0] += 1.0;
    } else {
      p[1] += 1.0;
      t[2] += 1.0;
    }
  }
  if (counts.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [label, c] : counts) {
    const double denom = 2.0 * c[0] + c[1] + c[2];
    sum += denom > 0.0 ? 2.0 * c[0] / denom : 0.0;
  }
  return sum / static_cast<double>(counts.size());
}

double micro_f1(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("prediction count mismatch");
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  // Single-label: micro precision = micro recall = accuracy.
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

ClassEvalReport eval_classify(const NodeMatrix& embeddings, std::span<const int> labels, double train_fraction,
                              std::uint64_t seed, int runs, const LogisticOptions& options) {
  if (static_cast<std::size_t>(embeddings.rows()) != labels.size()) {
    throw DimensionError("every node needs a label for classification");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ParameterError("train fraction must lie in (0, 1)");
  if (runs < 1) throw ParameterError("need at least one evaluation run");

  // Dense class ids.
  std::map<int, int> class_id;
  for (int y : labels) class_id.emplace(y, 0);
  int next = 0;
  for (auto& [label, id] : class_id) id = next++;
  std::vector<std::vector<int>> members(class_id.size());
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = class_id[labels[i]];
    members[static_cast<std::size_t>(y[i])].push_back(static_cast<int>(i));
  }

  ClassEvalReport report;
  report.train_fraction = train_fraction;
  report.runs = runs;
  for (int run = 0; run < runs; ++run) {
    Rng rng(seed, static_cast<std::uint64_t>(run));
    std::vector<int> train_idx;
    std::vector<int> test_idx;
    for (int attempt = 0;; ++attempt) {
      train_idx.clear();
      test_idx.clear();
      std::vector<bool> present(members.size(), false);
      for (std::size_t c = 0; c < members.size(); ++c) {
        auto group = members[c];
        rng.shuffle(group);
        auto take = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(group.size())));
        if (group.size() >= 2) take = std::clamp<std::size_t>(take, 1, group.size() - 1);
        else take = group.size();
        for (std::size_t t = 0; t < group.size(); ++t) (t < take ? train_idx : test_idx).push_back(group[t]);
        present[c] = take > 0;
      }
      if (std::all_of(present.begin(), present.end(), [](bool b) { return b; })) break;
      if (attempt > 100) throw ParameterError("could not draw a split containing every class");
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    NodeMatrix x_train(static_cast<Eigen::Index>(train_idx.size()), embeddings.cols());
    std::vector<int> y_train;
    for (std::size_t t = 0; t < train_idx.size(); ++t) {
      x_train.row(static_cast<Eigen::Index>(t)) = embeddings.row(train_idx[t]);
      y_train.push_back(y[static_cast<std::size_t>(train_idx[t])]);
    }
    NodeMatrix x_test(static_cast<Eigen::Index>(test_idx.size()), embeddings.cols());
    std::vector<int> y_test;
    for (std::size_t t = 0; t < test_idx.size(); ++t) {
      x_test.row(static_cast<Eigen::Index>(t)) = embeddings.row(test_idx[t]);
      y_test.push_back(y[static_cast<std::size_t>(test_idx[t])]);
    }
    LogisticRegression clf(options);
    clf.fit(x_train, y_train, static_cast<int>(members.size()));
    const auto predicted = clf.predict(x_test);
    report.macro_f1 += macro_f1(y_test, predicted);
    report.micro_f1 += micro_f1(y_test, predicted);
  }
  report.macro_f1 /= runs;
  report.micro_f1 /= runs;
  return report;
}

Projection project_2d(const NodeMatrix& embeddings) {
  if (embeddings.cols() < 2) throw ParameterError("2-d projection needs at least two embedding dimensions");
  const Eigen::MatrixXd centered = embeddings.rowwise() - embeddings.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const auto& values = eig.eigenvalues();  // ascending
  const Eigen::Index d = cov.rows();
  Projection out;
  out.coords = NodeMatrix::Zero(embeddings.rows(), 2);
  const double top = std::max(values(d - 1), 0.0);
  for (int c = 0; c < 2; ++c) {
    const double lambda = values(d - 1 - c);
    if (!(lambda > 1e-12 * top) || top <= 0.0) {
      out.rank_deficient = true;
      continue;
    }
    Eigen::VectorXd axis = eig.eigenvectors().col(d - 1 - c);
    Eigen::Index largest = 0;
    axis.cwiseAbs().maxCoeff(&largest);
    if (axis(largest) < 0.0) axis = -axis;
    out.coords.col(c) = centered * axis;
  }
  return out;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    m.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double cluster_purity(std::span<const int> clusters, std::span<const int> labels) {
  if (clusters.size() != labels.size()) throw DimensionError("cluster and label counts differ");
  if (clusters.empty()) return 0.0;
  std::map<int, std::map<int, std::size_t>> table;
  for (std::size_t i = 0; i < clusters.size(); ++i) ++table[clusters[i]][labels[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t best = 0;
    for (const auto& [label, c] : counts) best = std::max(best, c);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(clusters.size());
}

}  // namespace structopic
