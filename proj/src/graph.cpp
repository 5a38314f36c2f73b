#include "sybillab/graph.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "sybillab/error.hpp"

namespace sybillab {

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  if (n > std::numeric_limits<NodeId>::max()) {
    throw InvalidArgument("node count " + std::to_string(n) + " exceeds 32-bit id range");
  }
  std::vector<std::size_t> counts(n + 1, 0);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw InvalidArgument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") has node id out of range [0, " + std::to_string(n) + ")");
    }
    if (u == v) continue;
    ++counts[u + 1];
    ++counts[v + 1];
  }
  for (std::size_t i = 1; i <= n; ++i) counts[i] += counts[i - 1];

  std::vector<NodeId> raw(counts[n]);
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  for (const auto& [u, v] : edges) {
    if (u == v) continue;
    raw[cursor[u]++] = v;
    raw[cursor[v]++] = u;
  }

  Graph g;
  g.offsets_.assign(n + 1, 0);
  g.neighbors_.clear();
  g.neighbors_.reserve(raw.size());
  for (std::size_t v = 0; v < n; ++v) {
    auto first = raw.begin() + static_cast<std::ptrdiff_t>(counts[v]);
    auto last = raw.begin() + static_cast<std::ptrdiff_t>(counts[v + 1]);
    std::sort(first, last);
    last = std::unique(first, last);
    g.neighbors_.insert(g.neighbors_.end(), first, last);
    g.offsets_[v + 1] = g.neighbors_.size();
  }
  g.neighbors_.shrink_to_fit();
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < node_count(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

RegionLabels RegionLabels::blocks(std::size_t honest_count, std::size_t sybil_count) {
  std::vector<Label> labels(honest_count + sybil_count, Label::Honest);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(honest_count), labels.end(), Label::Sybil);
  return RegionLabels(std::move(labels));
}

std::vector<NodeId> RegionLabels::honest_nodes() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v) {
    if (labels_[v] == Label::Honest) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> RegionLabels::sybil_nodes() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < size(); ++v) {
    if (labels_[v] == Label::Sybil) out.push_back(v);
  }
  return out;
}

std::size_t RegionLabels::honest_count() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), Label::Honest));
}

std::vector<bool> TrainSplit::known_mask(std::size_t n) const {
  std::vector<bool> mask(n, false);
  for (NodeId v : known_honest) mask[v] = true;
  for (NodeId v : known_sybil) mask[v] = true;
  return mask;
}

std::vector<NodeId> TrainSplit::test_honest(const RegionLabels& regions) const {
  auto mask = known_mask(regions.size());
  std::vector<NodeId> out;
  for (NodeId v = 0; v < regions.size(); ++v) {
    if (!mask[v] && !regions.is_sybil(v)) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> TrainSplit::test_sybil(const RegionLabels& regions) const {
  auto mask = known_mask(regions.size());
  std::vector<NodeId> out;
  for (NodeId v = 0; v < regions.size(); ++v) {
    if (!mask[v] && regions.is_sybil(v)) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> TrainSplit::test_nodes(std::size_t n) const {
  auto mask = known_mask(n);
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v) {
    if (!mask[v]) out.push_back(v);
  }
  return out;
}

void TrainSplit::validate(const RegionLabels& regions) const {
  std::vector<bool> seen(regions.size(), false);
  auto check = [&](const std::vector<NodeId>& nodes, Label expected, const char* name) {
    for (NodeId v : nodes) {
      if (v >= regions.size()) {
        throw InvalidArgument(std::string(name) + " node " + std::to_string(v) + " out of range");
      }
      if (regions[v] != expected) {
        throw InvalidArgument(std::string(name) + " node " + std::to_string(v) + " has the other label");
      }
      if (seen[v]) throw InvalidArgument("node " + std::to_string(v) + " listed twice in split");
      seen[v] = true;
    }
  };
  check(known_honest, Label::Honest, "known honest");
  check(known_sybil, Label::Sybil, "known sybil");
}

DistanceSets bfs_distance_sets(const Graph& g, std::span<const NodeId> sources, std::size_t max_distance) {
  const std::size_t n = g.node_count();
  if (sources.empty()) throw InvalidArgument("bfs_distance_sets: empty source set");
  constexpr std::size_t kUnseen = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(n, kUnseen);
  std::vector<NodeId> frontier;
  for (NodeId s : sources) {
    if (s >= n) throw InvalidArgument("bfs_distance_sets: source " + std::to_string(s) + " out of range");
    if (dist[s] == kUnseen) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }

  DistanceSets out;
  out.by_distance.resize(max_distance + 1);
  out.by_distance[0] = frontier;
  std::sort(out.by_distance[0].begin(), out.by_distance[0].end());
  std::vector<NodeId> next;
  for (std::size_t k = 1; k <= max_distance && !frontier.empty(); ++k) {
    next.clear();
    for (NodeId u : frontier) {
      for (NodeId v : g.neighbors(u)) {
        if (dist[v] == kUnseen) {
          dist[v] = k;
          next.push_back(v);
        }
      }
    }
    std::sort(next.begin(), next.end());
    out.by_distance[k] = next;
    frontier.swap(next);
  }
  for (NodeId v = 0; v < n; ++v) {
    if (dist[v] == kUnseen) out.remainder.push_back(v);
  }
  return out;
}

std::pair<Graph, RegionLabels> compose_regions(const Graph& honest, const Graph& sybil) {
  const auto offset = static_cast<NodeId>(honest.node_count());
  std::vector<Edge> edges = honest.edges();
  edges.reserve(honest.edge_count() + sybil.edge_count());
  for (auto [u, v] : sybil.edges()) edges.emplace_back(u + offset, v + offset);
  return {Graph::from_edges(honest.node_count() + sybil.node_count(), edges),
          RegionLabels::blocks(honest.node_count(), sybil.node_count())};
}

Graph with_added_edges(const Graph& g, std::span<const Edge> extra) {
  std::vector<Edge> edges = g.edges();
  edges.insert(edges.end(), extra.begin(), extra.end());
  return Graph::from_edges(g.node_count(), edges);
}

Graph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(g.node_count(), kAbsent);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (local[nodes[i]] != kAbsent) throw InvalidArgument("induced_subgraph: duplicate node");
    local[nodes[i]] = static_cast<NodeId>(i);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (NodeId v : g.neighbors(nodes[i])) {
      NodeId j = local[v];
      if (j != kAbsent && i < j) edges.emplace_back(static_cast<NodeId>(i), j);
    }
  }
  return Graph::from_edges(nodes.size(), edges);
}

}  // namespace sybillab
