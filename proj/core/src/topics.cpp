#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include <Eigen/SVD>

#include "structopic/error.hpp"
#include "structopic/topics.hpp"

namespace structopic {

SparseMatrix row_normalized(const SparseMatrix& m) {
  SparseMatrix out = m;
  for (Eigen::Index i = 0; i < out.outerSize(); ++i) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(out, i); it; ++it) sum += it.value();
    if (sum <= 0.0) continue;
    for (SparseMatrix::InnerIterator it(out, i); it; ++it) it.valueRef() /= sum;
  }
  return out;
}

double mean_row_entropy(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      const double p = rows(k, j);
      if (p > 0.0) total -= p * std::log(p);
    }
  }
  return total / static_cast<double>(rows.rows());
}

SimplexFit simplex_kl_regression(std::span<const std::pair<int, double>> target,
                                 const Eigen::MatrixXd& basis, const KlOptions& options) {
  const Eigen::Index k = basis.rows();
  SimplexFit fit;
  fit.coefficients = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  if (k == 1) {
    fit.coefficients(0) = 1.0;
    return fit;
  }

  // Restrict to target columns some basis row covers.
  std::vector<int> cols;
  std::vector<double> q;
  for (auto [j, v] : target) {
    if (v <= 0.0) continue;
    if (basis.col(j).sum() <= 0.0) continue;
    cols.push_back(j);
    q.push_back(v);
  }
  if (cols.empty()) return fit;
  const auto s = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd b(k, s);
  for (Eigen::Index t = 0; t < s; ++t) b.col(t) = basis.col(cols[static_cast<std::size_t>(t)]);
  const Eigen::Map<const Eigen::VectorXd> qv(q.data(), s);

  auto objective = [&](const Eigen::VectorXd& c, Eigen::VectorXd& mix) {
    mix = b.transpose() * c;
    double f = 0.0;
    for (Eigen::Index t = 0; t < s; ++t) f += qv(t) * std::log(qv(t) / mix(t));
    return f;
  };

  Eigen::VectorXd mix;
  Eigen::VectorXd c = fit.coefficients;
  double f = objective(c, mix);
  double step = options.initial_step;
  Eigen::VectorXd candidate(k);
  Eigen::VectorXd candidate_mix;
  for (int it = 0; it < options.max_iters; ++it) {
    fit.iterations = it + 1;
    const Eigen::VectorXd grad = -(b * (qv.array() / mix.array()).matrix());
    const double mean_grad = c.dot(grad);
    const double projected = (c.array() * (grad.array() - mean_grad)).matrix().norm();
    if (projected < options.tolerance) break;

    const double gmin = grad.minCoeff();
    bool accepted = false;
    while (step > 1e-20) {
      candidate = (c.array() * (-step * (grad.array() - gmin)).exp()).matrix();
      candidate /= candidate.sum();
      const double fc = objective(candidate, candidate_mix);
      if (fc < f) {
        c = candidate;
        mix = candidate_mix;
        f = fc;
        fit.kl_trace.push_back(f);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  fit.coefficients = c;
  return fit;
}

WalkTopicFit recover_walk_topics(const SparseMatrix& m, const AnchorSet& anchors, int k,
                                 const KlOptions& options) {
  const Eigen::Index w = m.rows();
  if (m.rows() != m.cols()) throw DimensionError("co-occurrence matrix must be square");
  if (k < 1 || static_cast<std::size_t>(k) != anchors.size()) {
    throw ParameterError("topic count K=" + std::to_string(k) + " must equal the anchor count " +
                         std::to_string(anchors.size()));
  }

  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(w);
  for (Eigen::Index i = 0; i < w; ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) row_sum(i) += it.value();
  }
  const SparseMatrix q = row_normalized(m);

  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(k, w);
  std::vector<int> anchor_of(static_cast<std::size_t>(w), -1);
  for (int a = 0; a < k; ++a) {
    const int id = anchors.ids[static_cast<std::size_t>(a)];
    if (id < 0 || id >= w) throw ParameterError("anchor id " + std::to_string(id) + " out of range");
    if (row_sum(id) <= 0.0) {
      throw NumericError("anchor walk " + std::to_string(id) + " has an empty co-occurrence row");
    }
    anchor_of[static_cast<std::size_t>(id)] = a;
    for (SparseMatrix::InnerIterator it(q, id); it; ++it) basis(a, it.col()) = it.value();
  }

  WalkTopicFit out;
  out.coefficients = Eigen::MatrixXd::Zero(w, k);
  std::vector<char> uniform(static_cast<std::size_t>(w), 0);

  auto solve_range = [&](Eigen::Index begin, Eigen::Index end) {
    std::vector<std::pair<int, double>> target;
    for (Eigen::Index i = begin; i < end; ++i) {
      if (anchor_of[static_cast<std::size_t>(i)] >= 0) {
        out.coefficients(i, anchor_of[static_cast<std::size_t>(i)]) = 1.0;
        continue;
      }
      if (row_sum(i) <= 0.0) {
        out.coefficients.row(i).setConstant(1.0 / k);
        uniform[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      target.clear();
      for (SparseMatrix::InnerIterator it(q, i); it; ++it) {
        target.emplace_back(static_cast<int>(it.col()), it.value());
      }
      out.coefficients.row(i) = simplex_kl_regression(target, basis, options).coefficients.transpose();
    }
  };

  const auto threads = static_cast<Eigen::Index>(std::max(1u, options.threads));
  if (threads == 1 || w < 2 * threads) {
    solve_range(0, w);
  } else {
    std::vector<std::jthread> pool;
    const Eigen::Index chunk = (w + threads - 1) / threads;
    for (Eigen::Index t = 0; t < threads; ++t) {
      const Eigen::Index begin = t * chunk;
      const Eigen::Index end = std::min(w, begin + chunk);
      if (begin < end) pool.emplace_back(solve_range, begin, end);
    }
  }
  for (Eigen::Index i = 0; i < w; ++i) {
    if (uniform[static_cast<std::size_t>(i)]) out.uniform_rows.push_back(static_cast<int>(i));
  }

  // p(walk | topic) ∝ p(topic | walk) p(walk), with p(walk) from the row mass of M.
  out.u.resize(k, w);
  for (int a = 0; a < k; ++a) {
    out.u.row(a) = (out.coefficients.col(a).array() * row_sum.array()).matrix().transpose();
    const double sum = out.u.row(a).sum();
    if (sum <= 0.0) throw NumericError("topic " + std::to_string(a) + " received no walk mass");
    out.u.row(a) /= sum;
  }
  return out;
}

namespace {

// U^+ as (W x K) from a thin SVD of U^T, after checking U has full row rank.
Eigen::MatrixXd pseudo_inverse_rows(const Eigen::MatrixXd& u) {
  const Eigen::Index k = u.rows();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(u.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const Eigen::Index last = sigma.size() - 1;
  if (sigma.size() < k || sigma(last) <= 1e-10) {
    // The right singular vector of U^T for the smallest singular value gives
    // a combination of topic rows that (nearly) vanishes.
    const Eigen::VectorXd null = svd.matrixV().col(std::max<Eigen::Index>(last, 0));
    Eigen::Index first = 0;
    null.cwiseAbs().maxCoeff(&first);
    Eigen::VectorXd rest = null.cwiseAbs();
    rest(first) = -1.0;
    Eigen::Index second = 0;
    rest.maxCoeff(&second);
    throw NumericError("walk-topic matrix is rank deficient (smallest singular value " +
                       std::to_string(sigma.size() ? sigma(last) : 0.0) + "): topics " +
                       std::to_string(std::min(first, second)) + " and " +
                       std::to_string(std::max(first, second)) + " are linearly dependent");
  }
  return svd.matrixU() * sigma.cwiseInverse().asDiagonal() * svd.matrixV().transpose();
}

Eigen::MatrixXd normalize_node_topics(Eigen::MatrixXd r) {
  const auto k = static_cast<double>(r.cols());
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    r.row(i) = r.row(i).cwiseMax(0.0);
    const double sum = r.row(i).sum();
    if (sum > 0.0 && std::isfinite(sum)) {
      r.row(i) /= sum;
    } else {
      r.row(i).setConstant(1.0 / k);
    }
  }
  return r;
}

}  // namespace

Eigen::MatrixXd recover_node_topics(const SparseMatrix& y, const Eigen::MatrixXd& u) {
  if (y.cols() != u.cols()) {
    throw DimensionError("Y has " + std::to_string(y.cols()) + " walk columns but U has " +
                         std::to_string(u.cols()));
  }
  const Eigen::MatrixXd pinv = pseudo_inverse_rows(u);
  return normalize_node_topics(y * pinv);
}

Eigen::MatrixXd recover_node_topics(const Eigen::MatrixXd& y, const Eigen::MatrixXd& u) {
  if (y.cols() != u.cols()) {
    throw DimensionError("Y has " + std::to_string(y.cols()) + " walk columns but U has " +
                         std::to_string(u.cols()));
  }
  const Eigen::MatrixXd pinv = pseudo_inverse_rows(u);
  return normalize_node_topics(y * pinv);
}

AnchorFit fit_anchor_model(const SparseMatrix& y, const SparseMatrix& m,
                           const AnchorModelOptions& options) {
  if (options.k < 1) throw ParameterError("topic count K must be >= 1");
  NmfOptions nmf;
  nmf.rank = options.k;
  nmf.max_iters = options.nmf_iters;
  nmf.tolerance = options.nmf_tolerance;
  nmf.seed = options.seed;

  AnchorFit fit;
  fit.nmf = options.nmf_input == NmfInput::kRowNormalized ? nmf_factorize(row_normalized(m), nmf)
                                                          : nmf_factorize(m, nmf);
  fit.model.anchors = select_anchors(fit.nmf);
  auto walk_fit = recover_walk_topics(m, fit.model.anchors, options.k, options.kl);
  fit.model.u = std::move(walk_fit.u);
  fit.uniform_rows = std::move(walk_fit.uniform_rows);
  fit.model.r = recover_node_topics(y, fit.model.u);
  return fit;
}

}  // namespace structopic
