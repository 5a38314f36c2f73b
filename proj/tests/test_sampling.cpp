#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "sybillab/error.hpp"
#include "sybillab/sampling.hpp"
#include "sybillab/synthesis.hpp"

using namespace sybillab;

TEST_CASE("fraction 1 keeps the whole graph") {
  Rng rng(1);
  Graph g = testing::random_graph(80, 0.05, rng);
  auto s = forest_fire_sample(g, 1.0, 0.4, rng);
  CHECK(s.node_map.size() == 80);
  CHECK(s.subgraph == g);
}

TEST_CASE("sample size is ceil(fraction * n)") {
  Rng gen(2);
  Graph g = generate_ba(1001, 3, gen);
  for (double f : {0.01, 0.1, 0.333, 0.5}) {
    Rng rng(3);
    auto s = forest_fire_sample(g, f, 0.4, rng);
    CHECK(s.node_map.size() == static_cast<std::size_t>(std::ceil(f * 1001 - 1e-9)));
    CHECK(std::is_sorted(s.node_map.begin(), s.node_map.end()));
    CHECK(std::adjacent_find(s.node_map.begin(), s.node_map.end()) == s.node_map.end());
  }
}

TEST_CASE("sampling restarts fires on disconnected graphs") {
  // Ten isolated nodes force a new fire per node.
  Graph g = Graph::from_edges(10, {});
  Rng rng(4);
  auto s = forest_fire_sample(g, 0.5, 0.4, rng);
  CHECK(s.node_map.size() == 5);
  CHECK(s.subgraph.edge_count() == 0);
}

TEST_CASE("sampled subgraph is induced") {
  Rng gen(5);
  Graph g = generate_pl(500, 4, 0.5, gen);
  Rng rng(6);
  auto s = forest_fire_sample(g, 0.2, 0.4, rng);
  for (NodeId i = 0; i < s.node_map.size(); ++i) {
    for (NodeId j = i + 1; j < s.node_map.size(); ++j) {
      CHECK(s.subgraph.has_edge(i, j) == g.has_edge(s.node_map[i], s.node_map[j]));
    }
  }
}

TEST_CASE("sampling is deterministic per stream") {
  Rng gen(7);
  Graph g = generate_ba(800, 4, gen);
  Rng a(8), b(8), c(9);
  auto sa = forest_fire_sample(g, 0.1, 0.4, a);
  auto sb = forest_fire_sample(g, 0.1, 0.4, b);
  auto sc = forest_fire_sample(g, 0.1, 0.4, c);
  CHECK(sa.node_map == sb.node_map);
  CHECK_FALSE(sa.node_map == sc.node_map);
}

TEST_CASE("forest fire keeps sampled nodes clustered") {
  // A fire spreads along edges, so the sample is denser than a uniform pick.
  Rng gen(10);
  Graph g = generate_ba(3000, 3, gen);
  Rng rng(11);
  auto s = forest_fire_sample(g, 0.1, 0.4, rng);
  double density = static_cast<double>(s.subgraph.edge_count()) / static_cast<double>(s.node_map.size());
  double uniform = static_cast<double>(g.edge_count()) * 0.1 * 0.1 / (0.1 * 3000);
  CHECK(density > 2 * uniform);
}

TEST_CASE("invalid sampling arguments") {
  Graph g = testing::path_graph(5);
  Rng rng(1);
  CHECK_THROWS_AS(forest_fire_sample(g, 0.0, 0.4, rng), InvalidArgument);
  CHECK_THROWS_AS(forest_fire_sample(g, 1.5, 0.4, rng), InvalidArgument);
  CHECK_THROWS_AS(forest_fire_sample(g, 0.5, 1.0, rng), InvalidArgument);
  CHECK_THROWS_AS(forest_fire_sample(g, 0.5, 0.0, rng), InvalidArgument);
}

TEST_CASE("residual of a path") {
  Graph g = testing::path_graph(5);
  auto regions = RegionLabels::blocks(3, 2);
  auto r = residual_graph(g, regions, {2});
  CHECK(r.node_map == std::vector<NodeId>{0, 1, 3, 4});
  CHECK(r.graph.edge_count() == 2);
  CHECK(r.graph.has_edge(0, 1));
  CHECK(r.graph.has_edge(2, 3));
  CHECK_FALSE(r.regions.is_sybil(1));
  CHECK(r.regions.is_sybil(2));
}

TEST_CASE("residual of everything is rejected") {
  Graph g = testing::path_graph(3);
  CHECK_THROWS_AS(residual_graph(g, RegionLabels::blocks(2, 1), {0, 1, 2}), InvalidArgument);
  CHECK_THROWS_AS(residual_graph(g, RegionLabels::blocks(2, 1), {7}), InvalidArgument);
}

TEST_CASE("sample and residual partition the nodes") {
  Rng gen(12);
  Graph g = generate_ba(600, 3, gen);
  auto regions = RegionLabels::blocks(300, 300);
  Rng rng(13);
  auto s = forest_fire_sample(g, 0.25, 0.4, rng);
  auto r = residual_graph(g, regions, s.node_map);
  CHECK(s.node_map.size() + r.node_map.size() == 600);
  std::vector<NodeId> all(s.node_map);
  all.insert(all.end(), r.node_map.begin(), r.node_map.end());
  std::sort(all.begin(), all.end());
  for (NodeId v = 0; v < 600; ++v) CHECK(all[v] == v);
  for (std::size_t i = 0; i < r.node_map.size(); ++i) {
    CHECK(r.regions[static_cast<NodeId>(i)] == regions[r.node_map[i]]);
  }
}

TEST_CASE("restrict_split drops removed nodes and relabels survivors") {
  TrainSplit split{{0, 2}, {4, 5}};
  std::vector<NodeId> map{1, 2, 3, 5};
  auto local = restrict_split(split, map, 6);
  CHECK(local.known_honest == std::vector<NodeId>{1});
  CHECK(local.known_sybil == std::vector<NodeId>{3});
}
