#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "structopic/error.hpp"
#include "structopic/rng.hpp"
#include "structopic/topics.hpp"

namespace structopic {

double nmf_objective(const SparseMatrix& m, const Eigen::MatrixXd& h, const Eigen::MatrixXd& z) {
  // ||M - HZ||^2 = sum over stored entries of (M - HZ)^2
  //              + sum over all entries of (HZ)^2 - sum over stored entries of (HZ)^2.
  double on_support = 0.0;
  double hz_on_support = 0.0;
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      const double hz = h.row(i).dot(z.col(it.col()));
      const double d = it.value() - hz;
      on_support += d * d;
      hz_on_support += hz * hz;
    }
  }
  const Eigen::MatrixXd hth = h.transpose() * h;
  const Eigen::MatrixXd zzt = z * z.transpose();
  const double hz_total = (hth.array() * zzt.array()).sum();
  return on_support + std::max(0.0, hz_total - hz_on_support);
}

NmfFactors nmf_factorize(const SparseMatrix& m, const NmfOptions& options) {
  const Eigen::Index n = m.rows();
  if (m.rows() != m.cols()) throw DimensionError("NMF expects a square co-occurrence matrix");
  if (options.rank < 1 || options.rank > n) {
    throw ParameterError("NMF rank alpha=" + std::to_string(options.rank) +
                         " must lie in [1, |W|=" + std::to_string(n) + "]");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < m.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(m, i); it; ++it) {
      if (it.value() < 0.0 || !std::isfinite(it.value())) {
        throw ParameterError("NMF input must be finite and non-negative");
      }
      total += it.value();
    }
  }
  if (total <= 0.0) throw ParameterError("NMF input matrix is all zero");

  const Eigen::Index rank = options.rank;
  const double mean = total / (static_cast<double>(n) * static_cast<double>(n));
  const double scale = std::sqrt(mean / static_cast<double>(rank));
  Rng rng(options.seed, 0x4e4d46);
  NmfFactors f;
  f.h.resize(n, rank);
  f.z.resize(rank, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < rank; ++a) f.h(i, a) = scale * rng.uniform();
  for (Eigen::Index a = 0; a < rank; ++a)
    for (Eigen::Index j = 0; j < n; ++j) f.z(a, j) = scale * rng.uniform();

  auto apply = [](Eigen::MatrixXd& x, const Eigen::MatrixXd& num, const Eigen::MatrixXd& den) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (den(i, j) > 0.0) x(i, j) *= num(i, j) / den(i, j);
      }
    }
  };

  double prev = nmf_objective(m, f.h, f.z);
  f.objective_trace.push_back(prev);
  for (int it = 0; it < options.max_iters; ++it) {
    {
      const Eigen::MatrixXd num = m * f.z.transpose();
      const Eigen::MatrixXd den = f.h * (f.z * f.z.transpose());
      apply(f.h, num, den);
    }
    {
      const Eigen::MatrixXd num = (m.transpose() * f.h).transpose();
      const Eigen::MatrixXd den = (f.h.transpose() * f.h) * f.z;
      apply(f.z, num, den);
    }
    const double cur = nmf_objective(m, f.h, f.z);
    f.objective_trace.push_back(cur);
    const double change = std::abs(prev - cur) / std::max(prev, std::numeric_limits<double>::min());
    prev = cur;
    if (cur == 0.0 || change < options.tolerance) {
      f.converged = true;
      break;
    }
  }
  return f;
}

NmfFactors nmf_factorize(const Eigen::MatrixXd& m, const NmfOptions& options) {
  SparseMatrix sparse = m.sparseView(0.0, 0.0);
  return nmf_factorize(sparse, options);
}

AnchorSet select_anchors(const Eigen::MatrixXd& z) {
  const Eigen::Index alpha = z.rows();
  const Eigen::Index cols = z.cols();
  if (alpha > cols) {
    throw ParameterError("cannot select " + std::to_string(alpha) + " distinct anchors from " +
                         std::to_string(cols) + " walks");
  }
  if ((z.array() != 0.0).count() == 0) throw NumericError("NMF factor Z is all zero; no anchors defined");

  AnchorSet anchors;
  std::vector<bool> used(static_cast<std::size_t>(cols), false);
  std::vector<int> order(static_cast<std::size_t>(cols));
  for (Eigen::Index k = 0; k < alpha; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return z(k, a) > z(k, b); });
    for (int c : order) {
      if (!used[static_cast<std::size_t>(c)]) {
        used[static_cast<std::size_t>(c)] = true;
        anchors.ids.push_back(c);
        break;
      }
    }
  }
  return anchors;
}

}  // namespace structopic
