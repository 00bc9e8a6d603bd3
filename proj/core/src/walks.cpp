#include "structopic/walks.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "structopic/error.hpp"
#include "structopic/io.hpp"
#include "text.hpp"

namespace structopic {

namespace {

std::string join(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_int_list(std::string_view s, char sep, const std::string& where) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (auto f : detail::split(s, sep)) {
    int v = 0;
    if (!detail::parse_int(f, v)) throw ParseError(where + ": bad integer '" + std::string(f) + "'");
    out.push_back(v);
  }
  return out;
}

void extend_code(std::vector<int>& code, int max_label, int remaining,
                 std::vector<AnonymousWalk>& out) {
  if (remaining == 0) {
    out.push_back(AnonymousWalk{code});
    return;
  }
  for (int next = 0; next <= max_label + 1; ++next) {
    if (next == code.back()) continue;
    code.push_back(next);
    extend_code(code, std::max(max_label, next), remaining - 1, out);
    code.pop_back();
  }
}

}  // namespace

std::string AnonymousWalk::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(code[i]);
  }
  return out;
}

std::vector<NodeId> sample_walk(const Graph& graph, NodeId start, int steps, Rng& rng) {
  if (start < 0 || start >= graph.num_nodes()) {
    throw ParameterError("walk start " + std::to_string(start) + " out of range");
  }
  std::vector<NodeId> walk{start};
  if (graph.degree(start) == 0) return walk;
  walk.reserve(static_cast<std::size_t>(steps) + 1);
  NodeId cur = start;
  for (int s = 0; s < steps; ++s) {
    const auto nbrs = graph.neighbors(cur);
    cur = nbrs[rng.uniform_index(nbrs.size())];
    walk.push_back(cur);
  }
  return walk;
}

std::vector<AnonymousWalk> enumerate_anonymous_walks(int steps) {
  if (steps < 1) throw ParameterError("walk length must be >= 1");
  if (steps > kMaxEnumerationSteps) {
    throw ParameterError("refusing to enumerate anonymous walks of " + std::to_string(steps) +
                         " steps: the count grows like the Bell numbers; the limit is " +
                         std::to_string(kMaxEnumerationSteps));
  }
  std::vector<AnonymousWalk> out;
  std::vector<int> code{0};
  extend_code(code, 0, steps, out);
  return out;
}

std::string_view to_string(WalkUnit unit) {
  switch (unit) {
    case WalkUnit::kAnonymous: return "anonymous";
    case WalkUnit::kNode: return "node";
    case WalkUnit::kDegree: return "degree";
    case WalkUnit::kRaw: return "raw";
  }
  return "anonymous";
}

WalkUnit parse_walk_unit(std::string_view name) {
  if (name == "anonymous") return WalkUnit::kAnonymous;
  if (name == "node") return WalkUnit::kNode;
  if (name == "degree") return WalkUnit::kDegree;
  if (name == "raw" || name == "rw") return WalkUnit::kRaw;
  throw ParameterError("unknown walk unit '" + std::string(name) +
                       "' (expected anonymous, node, degree or raw)");
}

WalkVocabulary::WalkVocabulary(WalkUnit unit, std::vector<Token> sorted_tokens)
    : unit_(unit), tokens_(std::move(sorted_tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0 && !(tokens_[i - 1] < tokens_[i])) {
      throw ParameterError("vocabulary tokens must be strictly increasing");
    }
    index_.emplace(tokens_[i], static_cast<int>(i));
  }
}

std::optional<int> WalkVocabulary::find(const Token& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string WalkVocabulary::decode(std::size_t id) const { return join(tokens_.at(id), '-'); }

CorpusBuild build_corpus(const Graph& graph, const CorpusOptions& options) {
  if (options.walks_per_node < 1) throw ParameterError("walks per node N must be >= 1");
  if (options.steps < 1) throw ParameterError("walk length l must be >= 1");

  const auto n = static_cast<std::size_t>(graph.num_nodes());
  const auto walks = static_cast<std::size_t>(options.walks_per_node);
  std::vector<std::vector<Token>> node_tokens(n);
  WalkCorpus corpus;
  corpus.walks_per_node = options.walks_per_node;
  corpus.steps = options.steps;
  corpus.unit = options.unit;
  corpus.seed = options.seed;
  corpus.paths.resize(n * walks);
  corpus.isolated.assign(n, false);

  auto sample_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto node = static_cast<NodeId>(i);
      if (graph.degree(node) == 0) {
        for (std::size_t r = 0; r < walks; ++r) corpus.paths[i * walks + r] = {node};
        continue;
      }
      Rng rng(options.seed, i);
      auto& tokens = node_tokens[i];
      for (std::size_t r = 0; r < walks; ++r) {
        auto path = sample_walk(graph, node, options.steps, rng);
        switch (options.unit) {
          case WalkUnit::kAnonymous:
            tokens.push_back(anonymize(path).code);
            break;
          case WalkUnit::kNode:
            for (NodeId v : path) tokens.push_back({v});
            break;
          case WalkUnit::kDegree:
            for (NodeId v : path) tokens.push_back({static_cast<int>(graph.degree(v))});
            break;
          case WalkUnit::kRaw:
            tokens.emplace_back(path.begin(), path.end());
            break;
        }
        corpus.paths[i * walks + r] = std::move(path);
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    sample_range(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin < end) pool.emplace_back(sample_range, begin, end);
    }
  }

  for (std::size_t i = 0; i < n; ++i) corpus.isolated[i] = graph.degree(static_cast<NodeId>(i)) == 0;

  std::vector<Token> all;
  for (const auto& tokens : node_tokens) all.insert(all.end(), tokens.begin(), tokens.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  WalkVocabulary vocab(options.unit, std::move(all));

  corpus.documents.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& doc = corpus.documents[i];
    doc.reserve(node_tokens[i].size());
    for (const auto& token : node_tokens[i]) doc.push_back(*vocab.find(token));
  }

  CorpusBuild out{std::move(corpus), std::move(vocab), {}};
  out.node_walk = node_walk_matrix(out.corpus, out.vocab.size());
  return out;
}

SparseMatrix node_walk_matrix(const WalkCorpus& corpus, std::size_t vocab_size) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    for (int w : corpus.documents[i]) {
      if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
        throw DimensionError("document token " + std::to_string(w) + " outside vocabulary of size " +
                             std::to_string(vocab_size));
      }
      triplets.emplace_back(static_cast<Eigen::Index>(i), w, 1.0);
    }
  }
  SparseMatrix y(static_cast<Eigen::Index>(corpus.documents.size()),
                 static_cast<Eigen::Index>(vocab_size));
  y.setFromTriplets(triplets.begin(), triplets.end());
  return y;
}

SparseMatrix build_cooccurrence(const WalkCorpus& corpus, const WalkVocabulary& vocab) {
  const auto w = vocab.size();
  // Distinct tokens per document, and the inverted index token -> documents.
  std::vector<std::vector<int>> sets(corpus.documents.size());
  std::vector<std::vector<int>> containing(w);
  for (std::size_t k = 0; k < corpus.documents.size(); ++k) {
    auto& s = sets[k];
    s = corpus.documents[k];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    for (int t : s) {
      if (t < 0 || static_cast<std::size_t>(t) >= w) {
        throw DimensionError("corpus token " + std::to_string(t) + " outside vocabulary");
      }
      containing[static_cast<std::size_t>(t)].push_back(static_cast<int>(k));
    }
  }

  SparseMatrix m(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(w));
  std::vector<double> counts(w, 0.0);
  std::vector<int> touched;
  std::vector<Eigen::Index> nnz_per_row(w, 0);
  std::vector<std::vector<std::pair<int, double>>> rows(w);
  for (std::size_t a = 0; a < w; ++a) {
    touched.clear();
    for (int doc : containing[a]) {
      for (int b : sets[static_cast<std::size_t>(doc)]) {
        if (counts[static_cast<std::size_t>(b)] == 0.0) touched.push_back(b);
        counts[static_cast<std::size_t>(b)] += 1.0;
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& row = rows[a];
    row.reserve(touched.size());
    for (int b : touched) {
      row.emplace_back(b, counts[static_cast<std::size_t>(b)]);
      counts[static_cast<std::size_t>(b)] = 0.0;
    }
    nnz_per_row[a] = static_cast<Eigen::Index>(row.size());
  }
  m.reserve(nnz_per_row);
  for (std::size_t a = 0; a < w; ++a) {
    for (auto [b, c] : rows[a]) m.insert(static_cast<Eigen::Index>(a), b) = c;
  }
  m.makeCompressed();
  return m;
}

void save_vocabulary(const std::filesystem::path& path, const WalkVocabulary& vocab,
                     const std::string& header) {
  std::string out = "# " + header + "\n# unit\t" + std::string(to_string(vocab.unit())) + "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += std::to_string(i) + '\t' + join(vocab.token(i), ',') + '\t' + vocab.decode(i) + '\n';
  }
  io::write_text(path, out);
}

WalkVocabulary load_vocabulary(const std::filesystem::path& path) {
  const auto text = io::read_text(path);
  WalkUnit unit = WalkUnit::kAnonymous;
  std::vector<Token> tokens;
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (line.front() == '#') {
      const auto fields = detail::split_fields(line.substr(1));
      if (fields.size() == 2 && fields[0] == "unit") unit = parse_walk_unit(fields[1]);
      continue;
    }
    const auto fields = detail::split(line, '\t');
    std::size_t id = 0;
    if (fields.size() < 2 || !detail::parse_int(fields[0], id) || id != tokens.size()) {
      throw ParseError(where + ": expected 'id<TAB>token' with consecutive ids");
    }
    tokens.push_back(parse_int_list(fields[1], ',', where));
  }
  return WalkVocabulary(unit, std::move(tokens));
}

void save_corpus(const std::filesystem::path& path, const WalkCorpus& corpus,
                 const std::string& header) {
  std::string out = "# " + header + "\n";
  const auto per_walk_tokens = corpus.unit == WalkUnit::kNode || corpus.unit == WalkUnit::kDegree
                                   ? static_cast<std::size_t>(corpus.steps) + 1
                                   : std::size_t{1};
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    const auto& doc = corpus.documents[i];
    for (int r = 0; r < corpus.walks_per_node; ++r) {
      const auto path_nodes = corpus.path(static_cast<NodeId>(i), r);
      std::vector<int> p(path_nodes.begin(), path_nodes.end());
      std::vector<int> toks;
      const auto begin = static_cast<std::size_t>(r) * per_walk_tokens;
      for (std::size_t t = begin; t < begin + per_walk_tokens && t < doc.size(); ++t) toks.push_back(doc[t]);
      out += std::to_string(i) + '\t' + std::to_string(r) + '\t' + join(p, ',') + '\t' + join(toks, ',') + '\n';
    }
  }
  io::write_text(path, out);
}

WalkCorpus load_corpus(const std::filesystem::path& path, const WalkCorpus& shape, NodeId num_nodes) {
  WalkCorpus corpus;
  corpus.walks_per_node = shape.walks_per_node;
  corpus.steps = shape.steps;
  corpus.unit = shape.unit;
  corpus.seed = shape.seed;
  const auto n = static_cast<std::size_t>(num_nodes);
  const auto walks = static_cast<std::size_t>(shape.walks_per_node);
  corpus.documents.assign(n, {});
  corpus.paths.assign(n * walks, {});
  corpus.isolated.assign(n, false);

  const auto text = io::read_text(path);
  std::size_t line_no = 0;
  std::size_t seen = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (detail::trim(line).empty() || line.front() == '#') continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto fields = detail::split(line, '\t');
    std::size_t node = 0;
    std::size_t r = 0;
    if (fields.size() != 4 || !detail::parse_int(fields[0], node) || !detail::parse_int(fields[1], r) ||
        node >= n || r >= walks) {
      throw ParseError(where + ": expected 'node<TAB>walk<TAB>path<TAB>tokens'");
    }
    const auto p = parse_int_list(fields[2], ',', where);
    corpus.paths[node * walks + r].assign(p.begin(), p.end());
    const auto toks = parse_int_list(fields[3], ',', where);
    auto& doc = corpus.documents[node];
    doc.insert(doc.end(), toks.begin(), toks.end());
    ++seen;
  }
  if (seen != n * walks) {
    throw DimensionError(path.string() + ": expected " + std::to_string(n * walks) + " walks, found " +
                         std::to_string(seen));
  }
  for (std::size_t i = 0; i < n; ++i) corpus.isolated[i] = corpus.documents[i].empty();
  return corpus;
}

}  // namespace structopic
