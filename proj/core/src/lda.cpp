#include <cmath>
#include <string>
#include <vector>

#include "structopic/error.hpp"
#include "structopic/rng.hpp"
#include "structopic/topics.hpp"

namespace structopic {

TopicModel recover_no_anchor(const SparseMatrix& y, int k, std::uint64_t seed,
                             const LdaOptions& options) {
  if (k < 1) throw ParameterError("topic count K must be >= 1");
  const auto docs = static_cast<std::size_t>(y.rows());
  const auto vocab = static_cast<std::size_t>(y.cols());
  const auto topics = static_cast<std::size_t>(k);

  std::vector<std::vector<int>> words(docs);
  for (Eigen::Index d = 0; d < y.outerSize(); ++d) {
    for (SparseMatrix::InnerIterator it(y, d); it; ++it) {
      const auto count = static_cast<long>(std::llround(it.value()));
      if (count < 0) throw ParameterError("node-walk counts must be non-negative");
      words[static_cast<std::size_t>(d)].insert(words[static_cast<std::size_t>(d)].end(),
                                                static_cast<std::size_t>(count),
                                                static_cast<int>(it.col()));
    }
  }

  Rng rng(seed, 0x4c4441);
  std::vector<std::vector<int>> assignment(docs);
  std::vector<int> doc_topic(docs * topics, 0);
  std::vector<int> topic_word(topics * vocab, 0);
  std::vector<int> topic_total(topics, 0);
  for (std::size_t d = 0; d < docs; ++d) {
    assignment[d].resize(words[d].size());
    for (std::size_t t = 0; t < words[d].size(); ++t) {
      const auto z = rng.uniform_index(topics);
      assignment[d][t] = static_cast<int>(z);
      ++doc_topic[d * topics + z];
      ++topic_word[z * vocab + static_cast<std::size_t>(words[d][t])];
      ++topic_total[z];
    }
  }

  const double a = options.doc_prior;
  const double b = options.word_prior;
  const double wb = b * static_cast<double>(vocab);
  std::vector<double> p(topics);
  for (int sweep = 0; sweep < options.sweeps; ++sweep) {
    for (std::size_t d = 0; d < docs; ++d) {
      for (std::size_t t = 0; t < words[d].size(); ++t) {
        const auto w = static_cast<std::size_t>(words[d][t]);
        auto z = static_cast<std::size_t>(assignment[d][t]);
        --doc_topic[d * topics + z];
        --topic_word[z * vocab + w];
        --topic_total[z];

        double total = 0.0;
        for (std::size_t j = 0; j < topics; ++j) {
          total += (doc_topic[d * topics + j] + a) * (topic_word[j * vocab + w] + b) /
                   (topic_total[j] + wb);
          p[j] = total;
        }
        const double u = rng.uniform() * total;
        z = 0;
        while (z + 1 < topics && p[z] <= u) ++z;

        assignment[d][t] = static_cast<int>(z);
        ++doc_topic[d * topics + z];
        ++topic_word[z * vocab + w];
        ++topic_total[z];
      }
    }
  }

  TopicModel model;
  model.u.resize(k, static_cast<Eigen::Index>(vocab));
  for (std::size_t j = 0; j < topics; ++j) {
    for (std::size_t w = 0; w < vocab; ++w) {
      model.u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(w)) =
          (topic_word[j * vocab + w] + b) / (topic_total[j] + wb);
    }
  }
  model.r.resize(static_cast<Eigen::Index>(docs), k);
  for (std::size_t d = 0; d < docs; ++d) {
    const double n = static_cast<double>(words[d].size());
    for (std::size_t j = 0; j < topics; ++j) {
      model.r(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) =
          words[d].empty() ? 1.0 / k : (doc_topic[d * topics + j] + a) / (n + a * k);
    }
  }
  return model;
}

}  // namespace structopic
