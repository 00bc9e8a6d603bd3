#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace structopic {

using NodeId = std::int32_t;

// Undirected, unweighted, simple graph. Immutable after construction.
//
// Node ids are dense in [0, num_nodes). When a graph is loaded from a file
// the original ids are kept in original_ids() so outputs can be written in
// the caller's id space.
class Graph {
 public:
  Graph() = default;

  // Builds from an edge list over [0, num_nodes). Self-loops and duplicate
  // edges are dropped; the number of dropped loops is reported by
  // self_loops_dropped().
  Graph(NodeId num_nodes, std::span<const std::pair<NodeId, NodeId>> edges);

  NodeId num_nodes() const noexcept { return static_cast<NodeId>(adjacency_.size()); }
  std::size_t num_edges() const noexcept { return num_edges_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  std::size_t degree(NodeId v) const { return adjacency_[v].size(); }
  bool has_edge(NodeId u, NodeId v) const;

  // Each undirected edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  std::size_t self_loops_dropped() const noexcept { return self_loops_dropped_; }

  const std::vector<std::int64_t>& original_ids() const noexcept { return original_ids_; }
  void set_original_ids(std::vector<std::int64_t> ids);

  bool has_features() const noexcept { return features_.has_value(); }
  const Eigen::MatrixXd& features() const;
  void set_features(Eigen::MatrixXd features);
  void clear_features() { features_.reset(); }

  bool has_labels() const noexcept { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  void set_labels(std::vector<int> labels);

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t num_edges_ = 0;
  std::size_t self_loops_dropped_ = 0;
  std::vector<std::int64_t> original_ids_;
  std::optional<Eigen::MatrixXd> features_;
  std::optional<std::vector<int>> labels_;
};

// Tab-separated "src<TAB>dst" lines, '#' comments. Ids are compacted in
// first-appearance order.
Graph load_edge_list(const std::filesystem::path& path);

// Headerless CSV, one row per node in dense node order.
void load_features(const std::filesystem::path& path, Graph& graph);

// "node_id<TAB>label" lines keyed by original node id. Every node must be
// labeled.
void load_labels(const std::filesystem::path& path, Graph& graph);

void write_edge_list(const std::filesystem::path& path, const Graph& graph);
void write_features(const std::filesystem::path& path, const Graph& graph);
void write_labels(const std::filesystem::path& path, const Graph& graph);

enum class StructureType : int { kCluster = 0, kTShape = 1, kStar = 2 };

// Parameters of the ring-of-structures benchmark graph G(n).
struct SyntheticSpec {
  int n = 1;             // number of (cluster, T, star) triples
  int cluster_size = 5;  // clique size
  int t_arm_len = 2;     // nodes per arm, three arms around a center
  int star_leaves = 5;
  std::uint64_t seed = 0;

  void validate() const;
  int nodes_per_triple() const noexcept {
    return cluster_size + (1 + 3 * t_arm_len) + (1 + star_leaves);
  }
};

// 3n structures around a ring, alternating cluster -> T -> star. The port of
// each structure is its lowest-id node; consecutive ports are joined by one
// ring edge. Labels carry the StructureType of each node.
//
// The construction is fully determined by the sizes; the seed is recorded
// for provenance but consumes no randomness.
Graph generate_synthetic(const SyntheticSpec& spec);

}  // namespace structopic
