#include "sybillab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sybillab/error.hpp"

namespace sybillab {

SampleResult forest_fire_sample(const Graph& g, double fraction, double burn_probability, Rng& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("sample fraction must lie in (0, 1]");
  if (!(burn_probability > 0.0 && burn_probability < 1.0)) {
    throw InvalidArgument("burn probability must lie in (0, 1)");
  }
  const std::size_t n = g.node_count();
  const auto wanted = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));

  std::vector<bool> burned(n, false);
  std::vector<NodeId> unburned(n);  // pool for reseeding; swap-removal keeps it O(1)
  std::vector<std::size_t> pool_pos(n);
  for (NodeId v = 0; v < n; ++v) {
    unburned[v] = v;
    pool_pos[v] = v;
  }
  std::size_t pool_size = n;
  auto burn = [&](NodeId v) {
    burned[v] = true;
    std::size_t at = pool_pos[v];
    NodeId last = unburned[pool_size - 1];
    unburned[at] = last;
    pool_pos[last] = at;
    --pool_size;
  };

  std::size_t count = 0;
  std::deque<NodeId> queue;
  std::vector<NodeId> fresh;
  while (count < wanted) {
    NodeId seed = unburned[rng.uniform_index(pool_size)];
    burn(seed);
    ++count;
    queue.clear();
    queue.push_back(seed);
    while (!queue.empty() && count < wanted) {
      NodeId u = queue.front();
      queue.pop_front();
      fresh.clear();
      for (NodeId v : g.neighbors(u)) {
        if (!burned[v]) fresh.push_back(v);
      }
      std::size_t spread = std::min<std::size_t>(fresh.size(), rng.geometric_failures(1.0 - burn_probability));
      for (std::size_t i = 0; i < spread && count < wanted; ++i) {
        std::size_t j = i + rng.uniform_index(fresh.size() - i);
        std::swap(fresh[i], fresh[j]);
        burn(fresh[i]);
        ++count;
        queue.push_back(fresh[i]);
      }
    }
  }

  SampleResult result;
  for (NodeId v = 0; v < n; ++v) {
    if (burned[v]) result.node_map.push_back(v);
  }
  result.subgraph = induced_subgraph(g, result.node_map);
  return result;
}

ResidualGraph residual_graph(const Graph& g, const RegionLabels& regions, const std::vector<NodeId>& sampled) {
  const std::size_t n = g.node_count();
  if (regions.size() != n) throw InvalidArgument("region labels do not match graph size");
  std::vector<bool> removed(n, false);
  std::size_t removed_count = 0;
  for (NodeId v : sampled) {
    if (v >= n) throw InvalidArgument("sampled node " + std::to_string(v) + " out of range");
    if (!removed[v]) ++removed_count;
    removed[v] = true;
  }
  if (removed_count == n) throw InvalidArgument("residual graph would be empty: every node was sampled");
  ResidualGraph out;
  for (NodeId v = 0; v < n; ++v) {
    if (!removed[v]) out.node_map.push_back(v);
  }
  out.graph = induced_subgraph(g, out.node_map);
  out.regions = restrict_labels(regions, out.node_map);
  return out;
}

RegionLabels restrict_labels(const RegionLabels& regions, const std::vector<NodeId>& node_map) {
  std::vector<Label> labels;
  labels.reserve(node_map.size());
  for (NodeId v : node_map) labels.push_back(regions[v]);
  return RegionLabels(std::move(labels));
}

TrainSplit restrict_split(const TrainSplit& split, const std::vector<NodeId>& node_map, std::size_t original_n) {
  constexpr NodeId kAbsent = std::numeric_limits<NodeId>::max();
  std::vector<NodeId> local(original_n, kAbsent);
  for (std::size_t i = 0; i < node_map.size(); ++i) local[node_map[i]] = static_cast<NodeId>(i);
  TrainSplit out;
  for (NodeId v : split.known_honest) {
    if (local[v] != kAbsent) out.known_honest.push_back(local[v]);
  }
  for (NodeId v : split.known_sybil) {
    if (local[v] != kAbsent) out.known_sybil.push_back(local[v]);
  }
  std::sort(out.known_honest.begin(), out.known_honest.end());
  std::sort(out.known_sybil.begin(), out.known_sybil.end());
  return out;
}

}  // namespace sybillab
