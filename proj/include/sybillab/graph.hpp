#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace sybillab {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Immutable undirected simple graph in compressed sparse row layout.
///
/// Every undirected edge {u, v} is stored twice (in adj(u) and adj(v)).
/// Neighbor lists are sorted ascending. Safe to share across threads.
class Graph {
 public:
  Graph() = default;

  /// Builds from an arbitrary pair list. Duplicates (in either orientation)
  /// and self-loops are dropped. Throws InvalidArgument naming the offending
  /// pair when an endpoint is >= n.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return neighbors_.size() / 2; }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], degree(v)};
  }
  bool has_edge(NodeId u, NodeId v) const;

  /// Each undirected edge once, as (lo, hi), in ascending order.
  std::vector<Edge> edges() const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> adjacency() const { return neighbors_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbors_;
};

enum class Label : std::uint8_t { Honest = 0, Sybil = 1 };

/// Ground-truth partition of V into the honest region H and the Sybil region S.
class RegionLabels {
 public:
  RegionLabels() = default;
  explicit RegionLabels(std::vector<Label> labels) : labels_(std::move(labels)) {}

  /// Nodes [0, honest_count) honest, the rest Sybil.
  static RegionLabels blocks(std::size_t honest_count, std::size_t sybil_count);

  std::size_t size() const { return labels_.size(); }
  Label operator[](NodeId v) const { return labels_[v]; }
  bool is_sybil(NodeId v) const { return labels_[v] == Label::Sybil; }
  std::span<const Label> values() const { return labels_; }

  std::vector<NodeId> honest_nodes() const;
  std::vector<NodeId> sybil_nodes() const;
  std::size_t honest_count() const;
  std::size_t sybil_count() const { return size() - honest_count(); }

  friend bool operator==(const RegionLabels&, const RegionLabels&) = default;

 private:
  std::vector<Label> labels_;
};

/// Known (training) nodes of each class. Test sets are the complements within
/// each region and are derived on demand.
struct TrainSplit {
  std::vector<NodeId> known_honest;  // sorted
  std::vector<NodeId> known_sybil;   // sorted

  std::size_t known_count() const { return known_honest.size() + known_sybil.size(); }

  /// Per-node flag, true for nodes in either known set.
  std::vector<bool> known_mask(std::size_t n) const;
  std::vector<NodeId> test_honest(const RegionLabels& regions) const;
  std::vector<NodeId> test_sybil(const RegionLabels& regions) const;
  /// All unknown nodes, ascending.
  std::vector<NodeId> test_nodes(std::size_t n) const;

  /// Throws InvalidArgument unless known sets are consistent with regions.
  void validate(const RegionLabels& regions) const;

  friend bool operator==(const TrainSplit&, const TrainSplit&) = default;
};

/// Nodes grouped by shortest-path distance from a source set.
struct DistanceSets {
  std::vector<std::vector<NodeId>> by_distance;  // D_0 .. D_K, each sorted
  std::vector<NodeId> remainder;                 // distance > K or unreachable
};

/// Multi-source BFS. D_0 is the (deduplicated) source set.
DistanceSets bfs_distance_sets(const Graph& g, std::span<const NodeId> sources, std::size_t max_distance);

/// Disjoint union. Sybil node ids are offset by honest.node_count().
std::pair<Graph, RegionLabels> compose_regions(const Graph& honest, const Graph& sybil);

/// Adds edges to an existing graph (same sanitizing rules as from_edges).
Graph with_added_edges(const Graph& g, std::span<const Edge> extra);

/// Induced subgraph on `nodes` (must be unique). Node i of the result is nodes[i].
Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

}  // namespace sybillab
