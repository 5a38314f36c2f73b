#pragma once

#include <vector>

#include "sybillab/graph.hpp"
#include "sybillab/rng.hpp"

namespace sybillab {

struct SampleResult {
  Graph subgraph;
  std::vector<NodeId> node_map;  // subgraph id -> original id, ascending
};

inline constexpr double kDefaultBurnProbability = 0.4;

/// Forest-fire sampling of ceil(fraction * n) nodes.
///
/// A fire starts at a uniformly random unburned node. Each burning node
/// ignites Geometric(1 - burn_probability) - 1 of its unburned neighbors
/// (mean burn_probability / (1 - burn_probability)), capped at the number
/// available. When the fire dies out, a new one starts elsewhere.
SampleResult forest_fire_sample(const Graph& g, double fraction, double burn_probability, Rng& rng);

struct ResidualGraph {
  Graph graph;
  RegionLabels regions;
  std::vector<NodeId> node_map;  // residual id -> original id
};

/// Induced subgraph on V \ sampled with region labels carried over.
ResidualGraph residual_graph(const Graph& g, const RegionLabels& regions, const std::vector<NodeId>& sampled);

/// Restriction of labels and split to a node subset (node_map as above).
RegionLabels restrict_labels(const RegionLabels& regions, const std::vector<NodeId>& node_map);
TrainSplit restrict_split(const TrainSplit& split, const std::vector<NodeId>& node_map, std::size_t original_n);

}  // namespace sybillab
