#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "structopic/graph.hpp"
#include "structopic/rng.hpp"

namespace structopic {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// A walk with node identities replaced by first-occurrence positions,
// e.g. (0,9,8,11,9) -> (0,1,2,3,1).
struct AnonymousWalk {
  std::vector<int> code;

  auto operator<=>(const AnonymousWalk&) const = default;
  std::size_t steps() const noexcept { return code.empty() ? 0 : code.size() - 1; }
  std::string to_string() const;
};

std::vector<NodeId> sample_walk(const Graph& graph, NodeId start, int steps, Rng& rng);

template <typename T>
AnonymousWalk anonymize(std::span<const T> walk) {
  AnonymousWalk out;
  out.code.reserve(walk.size());
  std::vector<T> seen;
  for (const T& v : walk) {
    int label = -1;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      if (seen[k] == v) {
        label = static_cast<int>(k);
        break;
      }
    }
    if (label < 0) {
      label = static_cast<int>(seen.size());
      seen.push_back(v);
    }
    out.code.push_back(label);
  }
  return out;
}

inline AnonymousWalk anonymize(const std::vector<NodeId>& walk) {
  return anonymize(std::span<const NodeId>(walk));
}

// Every anonymous walk code with `steps` steps, lexicographic order.
// Refuses steps > kMaxEnumerationSteps.
inline constexpr int kMaxEnumerationSteps = 6;
std::vector<AnonymousWalk> enumerate_anonymous_walks(int steps);

// Unit of "word" extracted from each walk.
enum class WalkUnit { kAnonymous, kNode, kDegree, kRaw };

std::string_view to_string(WalkUnit unit);
WalkUnit parse_walk_unit(std::string_view name);

using Token = std::vector<int>;

// Observed tokens, sorted lexicographically; ids are positions.
class WalkVocabulary {
 public:
  WalkVocabulary() = default;
  WalkVocabulary(WalkUnit unit, std::vector<Token> sorted_tokens);

  WalkUnit unit() const noexcept { return unit_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  const Token& token(std::size_t id) const { return tokens_.at(id); }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::optional<int> find(const Token& token) const;
  // "0-1-2-3-1" for anonymous/raw walks, the bare number for node/degree.
  std::string decode(std::size_t id) const;

 private:
  WalkUnit unit_ = WalkUnit::kAnonymous;
  std::vector<Token> tokens_;
  std::map<Token, int> index_;
};

struct WalkCorpus {
  int walks_per_node = 0;  // N
  int steps = 0;           // l
  WalkUnit unit = WalkUnit::kAnonymous;
  std::uint64_t seed = 0;
  // documents[i]: vocabulary ids extracted from the walks of node i, with
  // multiplicity. Empty for isolated nodes.
  std::vector<std::vector<int>> documents;
  // paths[i * walks_per_node + r]: the r-th sampled node sequence from node i.
  std::vector<std::vector<NodeId>> paths;
  std::vector<bool> isolated;

  std::size_t num_nodes() const noexcept { return documents.size(); }
  std::span<const NodeId> path(NodeId node, int r) const {
    return paths[static_cast<std::size_t>(node) * walks_per_node + r];
  }
};

struct CorpusOptions {
  int walks_per_node = 100;
  int steps = 10;
  WalkUnit unit = WalkUnit::kAnonymous;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CorpusBuild {
  WalkCorpus corpus;
  WalkVocabulary vocab;
  SparseMatrix node_walk;  // Y: |V| x |vocab| occurrence counts
};

// Node i's walks are drawn from Rng(seed, i), so results do not depend on
// the thread count.
CorpusBuild build_corpus(const Graph& graph, const CorpusOptions& options);

// Y from documents.
SparseMatrix node_walk_matrix(const WalkCorpus& corpus, std::size_t vocab_size);

// M_ij = number of nodes whose document contains both token i and token j.
// Multiplicity within a document is ignored.
SparseMatrix build_cooccurrence(const WalkCorpus& corpus,
                                const WalkVocabulary& vocab);

// TSV persistence: vocab.tsv, walks.tsv, Y.tsv, M.tsv plus walks.json
// written by the pipeline. `header` is written as the first comment line.
void save_vocabulary(const std::filesystem::path& path, const WalkVocabulary& vocab,
                     const std::string& header);
WalkVocabulary load_vocabulary(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const WalkCorpus& corpus,
                 const std::string& header);
// walks_per_node, steps, unit and seed are restored from the caller's sidecar.
WalkCorpus load_corpus(const std::filesystem::path& path, const WalkCorpus& shape,
                       NodeId num_nodes);

}  // namespace structopic
