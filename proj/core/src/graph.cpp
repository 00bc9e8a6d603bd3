#include "structopic/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "structopic/error.hpp"
#include "text.hpp"

namespace structopic {

Graph::Graph(NodeId num_nodes, std::span<const std::pair<NodeId, NodeId>> edges)
    : adjacency_(static_cast<std::size_t>(num_nodes)) {
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw ParameterError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                           ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (u == v) {
      ++self_loops_dropped_;
      continue;
    }
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    num_edges_ += nbrs.size();
  }
  num_edges_ /= 2;
  original_ids_.resize(adjacency_.size());
  for (std::size_t i = 0; i < original_ids_.size(); ++i) original_ids_[i] = static_cast<std::int64_t>(i);
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto& nbrs = adjacency_[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges_);
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

void Graph::set_original_ids(std::vector<std::int64_t> ids) {
  if (ids.size() != adjacency_.size()) {
    throw DimensionError("original id count " + std::to_string(ids.size()) +
                         " != num_nodes " + std::to_string(adjacency_.size()));
  }
  original_ids_ = std::move(ids);
}

const Eigen::MatrixXd& Graph::features() const {
  if (!features_) throw ConfigError("graph has no node features");
  return *features_;
}

void Graph::set_features(Eigen::MatrixXd features) {
  if (features.rows() != num_nodes()) {
    throw DimensionError("feature rows " + std::to_string(features.rows()) +
                         " != num_nodes " + std::to_string(num_nodes()));
  }
  features_ = std::move(features);
}

const std::vector<int>& Graph::labels() const {
  if (!labels_) throw ConfigError("graph has no labels");
  return *labels_;
}

void Graph::set_labels(std::vector<int> labels) {
  if (labels.size() != static_cast<std::size_t>(num_nodes())) {
    throw DimensionError("label count " + std::to_string(labels.size()) +
                         " != num_nodes " + std::to_string(num_nodes()));
  }
  labels_ = std::move(labels);
}

Graph load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path.string());

  std::unordered_map<std::int64_t, NodeId> compact;
  std::vector<std::int64_t> original;
  std::vector<std::pair<NodeId, NodeId>> edges;
  auto intern = [&](std::int64_t id) {
    auto [it, inserted] = compact.try_emplace(id, static_cast<NodeId>(original.size()));
    if (inserted) original.push_back(id);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split_fields(body);
    std::int64_t src = 0;
    std::int64_t dst = 0;
    if (fields.size() != 2 || !detail::parse_int(fields[0], src) ||
        !detail::parse_int(fields[1], dst) || src < 0 || dst < 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected two non-negative integer node ids, got '" +
                       std::string(body) + "'");
    }
    const NodeId u = intern(src);
    const NodeId v = intern(dst);
    edges.emplace_back(u, v);
  }
  if (original.empty()) throw ParseError(path.string() + ": graph has no edges");

  Graph graph(static_cast<NodeId>(original.size()), edges);
  graph.set_original_ids(std::move(original));
  return graph;
}

void load_features(const std::filesystem::path& path, Graph& graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open features: " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t column = 0;
    for (auto cell : detail::split(body, ',')) {
      ++column;
      double value = 0.0;
      if (!detail::parse_double(detail::trim(cell), value)) {
        throw ParseError(path.string() + ": row " + std::to_string(line_no) + ", column " +
                         std::to_string(column) + ": non-numeric cell '" +
                         std::string(cell) + "'");
      }
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError(path.string() + ": row " + std::to_string(line_no) + " has " +
                           std::to_string(row.size()) + " columns, expected " +
                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != static_cast<std::size_t>(graph.num_nodes())) {
    throw DimensionError(path.string() + ": " + std::to_string(rows.size()) +
                         " feature rows for " + std::to_string(graph.num_nodes()) + " nodes");
  }
  const auto width = static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < width; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][j];
  }
  graph.set_features(std::move(x));
}

void load_labels(const std::filesystem::path& path, Graph& graph) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels: " + path.string());

  std::unordered_map<std::int64_t, NodeId> by_original;
  const auto& original = graph.original_ids();
  for (std::size_t i = 0; i < original.size(); ++i) by_original.emplace(original[i], static_cast<NodeId>(i));

  std::vector<int> labels(static_cast<std::size_t>(graph.num_nodes()), -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split_fields(body);
    std::int64_t node = 0;
    std::int64_t label = 0;
    if (fields.size() != 2 || !detail::parse_int(fields[0], node) ||
        !detail::parse_int(fields[1], label) || label < 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 'node_id<TAB>label'");
    }
    auto it = by_original.find(node);
    if (it == by_original.end()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unknown node id " +
                       std::to_string(node));
    }
    labels[it->second] = static_cast<int>(label);
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw DimensionError(path.string() + ": node " + std::to_string(original[i]) +
                           " has no label");
    }
  }
  graph.set_labels(std::move(labels));
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_edge_list(const std::filesystem::path& path, const Graph& graph) {
  auto out = open_for_write(path);
  const auto& ids = graph.original_ids();
  for (auto [u, v] : graph.edges()) out << ids[u] << '\t' << ids[v] << '\n';
}

void write_features(const std::filesystem::path& path, const Graph& graph) {
  auto out = open_for_write(path);
  const auto& x = graph.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(x(i, j));
    }
    out << '\n';
  }
}

void write_labels(const std::filesystem::path& path, const Graph& graph) {
  auto out = open_for_write(path);
  const auto& ids = graph.original_ids();
  const auto& labels = graph.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) out << ids[i] << '\t' << labels[i] << '\n';
}

void SyntheticSpec::validate() const {
  if (n < 1) throw ParameterError("synthetic n must be >= 1");
  if (cluster_size < 2 || t_arm_len < 2 || star_leaves < 2) {
    throw ParameterError("synthetic cluster_size, t_arm_len and star_leaves must be >= 2");
  }
}

Graph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<int> labels;
  std::vector<NodeId> ports;

  auto add_nodes = [&](int count, StructureType type) {
    const auto first = static_cast<NodeId>(labels.size());
    labels.insert(labels.end(), static_cast<std::size_t>(count), static_cast<int>(type));
    ports.push_back(first);
    return first;
  };

  for (int triple = 0; triple < spec.n; ++triple) {
    const NodeId c = add_nodes(spec.cluster_size, StructureType::kCluster);
    for (int a = 0; a < spec.cluster_size; ++a) {
      for (int b = a + 1; b < spec.cluster_size; ++b) edges.emplace_back(c + a, c + b);
    }

    const NodeId t = add_nodes(1 + 3 * spec.t_arm_len, StructureType::kTShape);
    for (int arm = 0; arm < 3; ++arm) {
      NodeId prev = t;
      for (int k = 0; k < spec.t_arm_len; ++k) {
        const NodeId node = t + 1 + arm * spec.t_arm_len + k;
        edges.emplace_back(prev, node);
        prev = node;
      }
    }

    const NodeId s = add_nodes(1 + spec.star_leaves, StructureType::kStar);
    for (int leaf = 1; leaf <= spec.star_leaves; ++leaf) edges.emplace_back(s, s + leaf);
  }

  for (std::size_t k = 0; k < ports.size(); ++k) {
    edges.emplace_back(ports[k], ports[(k + 1) % ports.size()]);
  }

  Graph graph(static_cast<NodeId>(labels.size()), edges);
  graph.set_labels(std::move(labels));
  return graph;
}

}  // namespace structopic
