#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sybillab/graph.hpp"
#include "sybillab/scores.hpp"

namespace sybillab {

// Structure-only propagation detectors. Each returns one score per node in
// [0, 1], higher meaning more Sybil-like, and is a pure function of its
// inputs. `threads` splits node sweeps into contiguous ranges; every sweep
// reads only the previous iterate, so results do not depend on it.

struct RankParams {
  std::optional<std::size_t> iterations;  // default ceil(log2 n)
  unsigned threads = 1;
};

/// Optional per-iteration diagnostics.
struct RankTrace {
  std::vector<double> total_trust;  // index 0 is the initial distribution
  std::vector<double> trust;        // final per-node trust
};

/// Early-terminated trust power iteration from known honest seeds.
/// Ranking key is trust / degree; score is the midrank position of the key
/// in descending order, scaled to [0, 1]. Isolated nodes score 1.
ScoreVector sybilrank(const Graph& g, const std::vector<NodeId>& honest_seeds, const RankParams& params = {},
                      RankTrace* trace = nullptr);

struct BeliefParams {
  double edge_homophily = 0.9;  // psi(same label)
  double known_prior = 0.9;     // P(label) for known nodes
  std::size_t max_iterations = 10;
  double tolerance = 1e-6;
};

struct BeliefTrace {
  std::size_t iterations = 0;
  double max_message_change = 0.0;
  /// Largest |m(0) + m(1) - 1| over all messages after the final pass.
  double max_normalization_error = 0.0;
};

/// Sum-product loopy belief propagation on a binary pairwise MRF, flooding
/// schedule. Score is the marginal P(sybil).
ScoreVector sybilbelief(const Graph& g, const TrainSplit& split, const BeliefParams& params = {},
                        BeliefTrace* trace = nullptr);

enum class ScarVariant { Constant, Degree };

struct ScarParams {
  ScarVariant variant = ScarVariant::Degree;
  double homophily = 0.8;        // Constant variant only
  double prior_strength = 0.48;  // |prior residual| of known nodes
  std::size_t max_iterations = 100;
  double tolerance = 1e-5;
  unsigned threads = 1;
};

struct ScarTrace {
  std::vector<double> max_change;  // max |delta residual| per sweep
};

/// Local-rule residual propagation:
///   r_v <- q_v + sum_{u in N(v)} 2 * r_u * w_uv,   r clamped to [-0.5, 0.5]
/// with w_uv = homophily - 0.5 (Constant) or 1 / (2 d(u)) (Degree).
/// Score is r + 0.5.
ScoreVector sybilscar(const Graph& g, const TrainSplit& split, const ScarParams& params = {},
                      ScarTrace* trace = nullptr);

}  // namespace sybillab
