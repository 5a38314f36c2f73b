#include "sybillab/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "sybillab/error.hpp"
#include "sybillab/io.hpp"

namespace sybillab {

void AttackConfig::validate() const {
  if (!(edges_per_sybil >= 0.0) || !std::isfinite(edges_per_sybil)) {
    throw InvalidArgument("edges_per_sybil must be a finite value >= 0");
  }
  if (!(p_targeted >= 0.0 && p_targeted <= 1.0)) throw InvalidArgument("p_targeted must lie in [0, 1]");
  if (hit_distance_pdf.empty()) throw InvalidArgument("hit distance pdf must have at least one entry");
  double total = 0.0;
  for (double p : hit_distance_pdf) {
    if (!(p >= 0.0)) throw InvalidArgument("hit distance pdf entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("hit distance pdf must sum to 1");
}

std::size_t round_count(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

namespace {

// Shared growth process. Each new node draws its first target from the
// endpoint urn; each further edge closes a triangle through the last
// preferential target with probability p, else draws from the urn again.
// Targets already linked to the new node are redrawn.
Graph grow_preferential(std::size_t n, std::size_t m, double p, Rng& rng) {
  if (m < 1 || m >= n) {
    throw InvalidArgument("preferential growth requires 1 <= m < n (got n=" + std::to_string(n) +
                          ", m=" + std::to_string(m) + ")");
  }
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("triad probability must lie in [0, 1]");

  std::vector<std::vector<NodeId>> adj(n);
  std::vector<Edge> edges;
  edges.reserve(m * (n - m));
  std::vector<NodeId> urn;
  urn.reserve(2 * m * (n - m));

  for (NodeId leaf = 1; leaf <= m; ++leaf) {
    edges.emplace_back(0, leaf);
    adj[0].push_back(leaf);
    adj[leaf].push_back(0);
    urn.push_back(0);
    urn.push_back(leaf);
  }

  std::vector<NodeId> chosen;
  std::vector<NodeId> candidates;
  auto is_chosen = [&](NodeId x) { return std::find(chosen.begin(), chosen.end(), x) != chosen.end(); };
  auto draw_from_urn = [&]() {
    for (;;) {
      NodeId x = urn[rng.uniform_index(urn.size())];
      if (!is_chosen(x)) return x;
    }
  };

  for (auto source = static_cast<NodeId>(m + 1); source < n; ++source) {
    chosen.clear();
    NodeId target = draw_from_urn();
    chosen.push_back(target);
    while (chosen.size() < m) {
      if (p > 0.0 && rng.uniform01() < p) {
        candidates.clear();
        for (NodeId nb : adj[target]) {
          if (!is_chosen(nb)) candidates.push_back(nb);
        }
        if (!candidates.empty()) {
          chosen.push_back(candidates[rng.uniform_index(candidates.size())]);
          continue;
        }
      }
      target = draw_from_urn();
      chosen.push_back(target);
    }
    for (NodeId t : chosen) {
      edges.emplace_back(t, source);
      adj[t].push_back(source);
      adj[source].push_back(t);
      urn.push_back(t);
      urn.push_back(source);
    }
  }
  return Graph::from_edges(n, edges);
}

}  // namespace

Graph generate_ba(std::size_t n, std::size_t m, Rng& rng) { return grow_preferential(n, m, 0.0, rng); }

Graph generate_pl(std::size_t n, std::size_t m, double p, Rng& rng) { return grow_preferential(n, m, p, rng); }

Graph generate_region(const RegionModel& model, Rng& rng) {
  struct Visitor {
    Rng& rng;
    Graph operator()(const BarabasiAlbertModel& ba) const { return generate_ba(ba.n, ba.m, rng); }
    Graph operator()(const PowerLawClusterModel& pl) const { return generate_pl(pl.n, pl.m, pl.p, rng); }
    Graph operator()(const EdgeFileModel& file) const {
      return load_edge_list(file.path, file.mutual_only ? Direction::Mutual : Direction::Union).graph;
    }
  };
  return std::visit(Visitor{rng}, model);
}

namespace {

std::vector<NodeId> sample_without_replacement(std::vector<NodeId> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::size_t class_train_count(std::size_t class_size, double fraction, const char* name) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0, 1)");
  if (class_size < 2) {
    throw InvalidArgument(std::string(name) + " class has " + std::to_string(class_size) +
                          " nodes; need >= 2 for a nonempty train and test set");
  }
  return std::clamp<std::size_t>(round_count(fraction * static_cast<double>(class_size)), 1, class_size - 1);
}

}  // namespace

TrainSplit sample_train_split(const RegionLabels& regions, double honest_fraction, double sybil_fraction, Rng& rng) {
  auto honest = regions.honest_nodes();
  auto sybil = regions.sybil_nodes();
  std::size_t kh = class_train_count(honest.size(), honest_fraction, "honest");
  std::size_t ks = class_train_count(sybil.size(), sybil_fraction, "sybil");
  TrainSplit split;
  split.known_honest = sample_without_replacement(std::move(honest), kh, rng);
  split.known_sybil = sample_without_replacement(std::move(sybil), ks, rng);
  return split;
}

TrainSplit sample_train_split(const RegionLabels& regions, double fraction, Rng& rng) {
  return sample_train_split(regions, fraction, fraction, rng);
}

AttackTargets resolve_targets(const RegionLabels& regions, const TrainSplit& split, TargetSet honest_targets) {
  AttackTargets t;
  t.honest = honest_targets == TargetSet::KnownHonest ? split.known_honest : regions.honest_nodes();
  t.sybil = regions.sybil_nodes();
  return t;
}

std::vector<Edge> place_attack_edges(const Graph& g, const RegionLabels& regions, const AttackTargets& targets,
                                     const AttackConfig& cfg, Rng& rng, std::vector<int>* hit_distances) {
  cfg.validate();
  if (regions.size() != g.node_count()) throw InvalidArgument("region labels do not match graph size");
  const auto honest = regions.honest_nodes();
  const auto sybil = regions.sybil_nodes();
  const std::size_t wanted = round_count(cfg.edges_per_sybil * static_cast<double>(sybil.size()));
  if (hit_distances) hit_distances->clear();
  if (wanted == 0) return {};
  if (honest.empty() || sybil.empty()) throw InvalidArgument("attack edges need nonempty honest and sybil regions");

  std::size_t existing_cross = 0;
  for (NodeId s : sybil) {
    for (NodeId nb : g.neighbors(s)) existing_cross += regions.is_sybil(nb) ? 0 : 1;
  }
  const double capacity = static_cast<double>(honest.size()) * static_cast<double>(sybil.size()) -
                          static_cast<double>(existing_cross);
  if (static_cast<double>(wanted) > capacity) {
    throw RuntimeFailure("cannot place " + std::to_string(wanted) + " attack edges: only " +
                         std::to_string(static_cast<std::size_t>(capacity)) + " free honest-sybil pairs");
  }

  // Targeted component: distance sets around T_H, restricted to honest nodes.
  std::vector<std::vector<NodeId>> rings;
  std::vector<double> cumulative;
  const bool targeted = cfg.p_targeted > 0.0;
  if (targeted) {
    if (targets.honest.empty() || targets.sybil.empty()) {
      throw InvalidArgument("targeted attack needs nonempty T_H and T_S");
    }
    for (NodeId v : targets.honest) {
      if (v >= g.node_count() || regions.is_sybil(v)) throw InvalidArgument("T_H must be a subset of H");
    }
    for (NodeId v : targets.sybil) {
      if (v >= g.node_count() || !regions.is_sybil(v)) throw InvalidArgument("T_S must be a subset of S");
    }
    auto sets = bfs_distance_sets(g, targets.honest, cfg.max_distance());
    rings = std::move(sets.by_distance);
    for (auto& ring : rings) {
      std::erase_if(ring, [&](NodeId v) { return regions.is_sybil(v); });
    }
    double mass = 0.0;
    cumulative.resize(rings.size());
    for (std::size_t k = 0; k < rings.size(); ++k) {
      if (!rings[k].empty()) mass += cfg.hit_distance_pdf[k];
      cumulative[k] = mass;
    }
    if (mass <= 0.0) throw RuntimeFailure("every distance set with positive hit probability is empty");
    for (double& c : cumulative) c /= mass;
  }

  auto pair_key = [](NodeId h, NodeId s) { return (std::uint64_t{h} << 32) | s; };
  std::unordered_set<std::uint64_t> placed;
  placed.reserve(wanted * 2);
  std::vector<Edge> out;
  out.reserve(wanted);
  const std::size_t max_attempts = 100 * wanted + 10000;
  std::size_t attempts = 0;
  while (out.size() < wanted) {
    if (++attempts > max_attempts) {
      throw RuntimeFailure("attack placement exhausted after " + std::to_string(attempts - 1) + " draws with " +
                           std::to_string(out.size()) + "/" + std::to_string(wanted) +
                           " edges placed; target sets are too small or saturated");
    }
    NodeId s = 0;
    NodeId h = 0;
    int hop = -1;
    if (targeted && rng.bernoulli(cfg.p_targeted)) {
      s = targets.sybil[rng.uniform_index(targets.sybil.size())];
      double u = rng.uniform01();
      std::size_t k = 0;
      while (k + 1 < cumulative.size() && (u >= cumulative[k] || rings[k].empty())) ++k;
      h = rings[k][rng.uniform_index(rings[k].size())];
      hop = static_cast<int>(k);
    } else {
      s = sybil[rng.uniform_index(sybil.size())];
      h = honest[rng.uniform_index(honest.size())];
    }
    if (g.has_edge(h, s) || !placed.insert(pair_key(h, s)).second) continue;
    out.emplace_back(h, s);
    if (hit_distances) hit_distances->push_back(hop);
  }
  return out;
}

LabeledNetwork assemble_network(const Graph& honest, const Graph& sybil, const AttackConfig& attack,
                                double train_fraction, std::uint64_t seed) {
  auto [base, regions] = compose_regions(honest, sybil);
  Rng split_rng = Rng::derive(seed, "split");
  TrainSplit split = sample_train_split(regions, train_fraction, split_rng);
  Rng attack_rng = Rng::derive(seed, "attack");
  auto targets = resolve_targets(regions, split, attack.honest_targets);
  auto attack_edges = place_attack_edges(base, regions, targets, attack, attack_rng);
  LabeledNetwork net;
  net.graph = with_added_edges(base, attack_edges);
  net.regions = std::move(regions);
  net.split = std::move(split);
  net.attack_edges = std::move(attack_edges);
  return net;
}

LabeledNetwork synthesize_network(const SynthSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  spec.attack.validate();
  Rng honest_rng = Rng::derive(spec.seed, "honest-region");
  Rng sybil_rng = Rng::derive(spec.seed, "sybil-region");
  Graph honest = generate_region(spec.honest, honest_rng);
  Graph sybil = generate_region(spec.sybil, sybil_rng);
  return assemble_network(honest, sybil, spec.attack, spec.train_fraction, spec.seed);
}

LabeledNetwork reattack_network(const LabeledNetwork& base, const AttackConfig& attack, std::uint64_t seed) {
  std::unordered_set<std::uint64_t> old;
  for (auto [h, s] : base.attack_edges) {
    old.insert((std::uint64_t{std::min(h, s)} << 32) | std::max(h, s));
  }
  std::vector<Edge> kept;
  for (auto [u, v] : base.graph.edges()) {
    if (!old.contains((std::uint64_t{u} << 32) | v)) kept.emplace_back(u, v);
  }
  Graph clean = Graph::from_edges(base.graph.node_count(), kept);
  Rng attack_rng = Rng::derive(seed, "attack");
  auto targets = resolve_targets(base.regions, base.split, attack.honest_targets);
  auto edges = place_attack_edges(clean, base.regions, targets, attack, attack_rng);
  LabeledNetwork net;
  net.graph = with_added_edges(clean, edges);
  net.regions = base.regions;
  net.split = base.split;
  net.attack_edges = std::move(edges);
  return net;
}

double average_clustering(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) return 0.0;
  std::vector<NodeId> mark(n, std::numeric_limits<NodeId>::max());
  double total = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    auto nb = g.neighbors(v);
    if (nb.size() < 2) continue;
    for (NodeId u : nb) mark[u] = v;
    std::size_t links = 0;
    for (NodeId u : nb) {
      for (NodeId w : g.neighbors(u)) links += mark[w] == v ? 1 : 0;
    }
    double d = static_cast<double>(nb.size());
    total += static_cast<double>(links) / (d * (d - 1.0));
  }
  return total / static_cast<double>(n);
}

}  // namespace sybillab
