#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sybillab/graph.hpp"
#include "sybillab/rng.hpp"

namespace sybillab {

/// Which honest nodes a targeted attack aims at.
enum class TargetSet { KnownHonest, AllHonest };

struct AttackConfig {
  double edges_per_sybil = 0.0;
  double p_targeted = 0.0;
  std::vector<double> hit_distance_pdf{1.0};  // p_0 .. p_K
  TargetSet honest_targets = TargetSet::KnownHonest;

  /// Throws InvalidArgument on out-of-range values or a pdf not summing to 1.
  void validate() const;
  std::size_t max_distance() const { return hit_distance_pdf.size() - 1; }
};

/// Explicit target node sets for place_attack_edges.
struct AttackTargets {
  std::vector<NodeId> honest;  // T_H
  std::vector<NodeId> sybil;   // T_S
};

struct BarabasiAlbertModel {
  std::size_t n = 0;
  std::size_t m = 0;
};

struct PowerLawClusterModel {
  std::size_t n = 0;
  std::size_t m = 0;
  double p = 0.0;
};

/// A region read from an edge-list file (e.g. the SNAP Facebook graph).
struct EdgeFileModel {
  std::string path;
  bool mutual_only = false;
};

using RegionModel = std::variant<BarabasiAlbertModel, PowerLawClusterModel, EdgeFileModel>;

struct SynthSpec {
  RegionModel honest;
  RegionModel sybil;
  AttackConfig attack;
  double train_fraction = 0.05;
  std::uint64_t seed = 42;
};

struct LabeledNetwork {
  Graph graph;
  RegionLabels regions;
  TrainSplit split;
  std::vector<Edge> attack_edges;  // (honest, sybil) in placement order
};

/// Preferential attachment from a star seed on m+1 nodes; m*(n-m) edges.
Graph generate_ba(std::size_t n, std::size_t m, Rng& rng);

/// Holme-Kim growth: preferential attachment plus triad closure with
/// probability p. With p == 0 the output equals generate_ba on the same stream.
Graph generate_pl(std::size_t n, std::size_t m, double p, Rng& rng);

Graph generate_region(const RegionModel& model, Rng& rng);

/// Half-up rounding used for all edge and split counts.
std::size_t round_count(double x);

/// Uniform sample of round(fraction * |class|) nodes per class, clamped to
/// [1, |class| - 1] so each test class stays nonempty.
TrainSplit sample_train_split(const RegionLabels& regions, double fraction, Rng& rng);
TrainSplit sample_train_split(const RegionLabels& regions, double honest_fraction, double sybil_fraction,
                              Rng& rng);

/// Places round(edges_per_sybil * n_S) distinct cross-region edges that do
/// not duplicate existing edges. Targeted draws pick k from the hit pdf
/// (renormalized over nonempty distance sets) and a uniform node of D_k(T_H),
/// computed once on g. Returned pairs are (honest, sybil). When
/// hit_distances is given it receives, per edge, the targeted hop distance k
/// or -1 for a random edge.
std::vector<Edge> place_attack_edges(const Graph& g, const RegionLabels& regions, const AttackTargets& targets,
                                     const AttackConfig& cfg, Rng& rng, std::vector<int>* hit_distances = nullptr);

/// Resolves the default target sets: T_H = known honest (or all of H), T_S = S.
AttackTargets resolve_targets(const RegionLabels& regions, const TrainSplit& split, TargetSet honest_targets);

/// Composes two regions, samples the split, and attacks the result.
/// Uses named RNG streams derived from spec.seed.
LabeledNetwork synthesize_network(const SynthSpec& spec);

/// Composes given regions (already built), then split + attack with
/// streams derived from seed.
LabeledNetwork assemble_network(const Graph& honest, const Graph& sybil, const AttackConfig& attack,
                                double train_fraction, std::uint64_t seed);

/// Re-attacks an existing network keeping its regions and split.
LabeledNetwork reattack_network(const LabeledNetwork& base, const AttackConfig& attack, std::uint64_t seed);

/// Average local clustering coefficient (nodes with degree < 2 count as 0).
double average_clustering(const Graph& g);

}  // namespace sybillab
