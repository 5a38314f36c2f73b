#include "sybillab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "sybillab/error.hpp"

namespace sybillab {

namespace {

void check_nodes(const Graph& g, const std::vector<NodeId>& nodes, const char* what) {
  for (NodeId v : nodes) {
    if (v >= g.node_count()) throw InvalidArgument(std::string(what) + " node " + std::to_string(v) + " out of range");
  }
}

// Position of each key in descending order, ties sharing their mean position.
std::vector<double> descending_midranks(const std::vector<NodeId>& nodes, const std::vector<double>& key) {
  std::vector<NodeId> order(nodes);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (key[a] != key[b]) return key[a] > key[b];
    return a < b;
  });
  std::vector<double> position(key.size(), 0.0);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && key[order[j + 1]] == key[order[i]]) ++j;
    double mid = 0.5 * static_cast<double>(i + j);
    for (std::size_t t = i; t <= j; ++t) position[order[t]] = mid;
    i = j + 1;
  }
  return position;
}

}  // namespace

ScoreVector sybilrank(const Graph& g, const std::vector<NodeId>& honest_seeds, const RankParams& params,
                      RankTrace* trace) {
  const std::size_t n = g.node_count();
  if (honest_seeds.empty()) throw InvalidArgument("sybilrank: honest seed set is empty");
  check_nodes(g, honest_seeds, "sybilrank seed");

  std::vector<NodeId> seeds(honest_seeds);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  std::vector<double> trust(n, 0.0);
  const double share = static_cast<double>(n) / static_cast<double>(seeds.size());
  for (NodeId s : seeds) trust[s] = share;

  std::size_t iterations = params.iterations.value_or(
      n > 1 ? static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) : 0);
  if (trace) {
    trace->total_trust.assign(1, std::accumulate(trust.begin(), trust.end(), 0.0));
  }

  std::vector<double> next(n, 0.0);
  for (std::size_t it = 0; it < iterations; ++it) {
    detail::parallel_ranges(n, params.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t v = begin; v < end; ++v) {
        auto nb = g.neighbors(static_cast<NodeId>(v));
        if (nb.empty()) {
          next[v] = trust[v];  // isolated nodes keep their mass
          continue;
        }
        double sum = 0.0;
        for (NodeId u : nb) sum += trust[u] / static_cast<double>(g.degree(u));
        next[v] = sum;
      }
    });
    trust.swap(next);
    if (trace) trace->total_trust.push_back(std::accumulate(trust.begin(), trust.end(), 0.0));
  }

  std::vector<NodeId> connected;
  std::vector<double> key(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (g.degree(v) > 0) {
      connected.push_back(v);
      key[v] = trust[v] / static_cast<double>(g.degree(v));
    }
  }
  auto position = descending_midranks(connected, key);

  ScoreVector out{std::vector<double>(n, 1.0), "sybilrank"};
  const double span = connected.size() > 1 ? static_cast<double>(connected.size() - 1) : 0.0;
  for (NodeId v : connected) out.values[v] = span > 0.0 ? position[v] / span : 0.5;
  if (trace) trace->trust = std::move(trust);
  return out;
}

ScoreVector sybilbelief(const Graph& g, const TrainSplit& split, const BeliefParams& params, BeliefTrace* trace) {
  const std::size_t n = g.node_count();
  if (split.known_count() == 0) throw InvalidArgument("sybilbelief: needs at least one known node");
  if (!(params.edge_homophily > 0.0 && params.edge_homophily < 1.0)) {
    throw InvalidArgument("sybilbelief: edge homophily must lie in (0, 1)");
  }
  if (!(params.known_prior > 0.0 && params.known_prior < 1.0)) {
    throw InvalidArgument("sybilbelief: known prior must lie in (0, 1)");
  }
  check_nodes(g, split.known_honest, "known honest");
  check_nodes(g, split.known_sybil, "known sybil");

  // Node log-potentials, index 0 = honest, 1 = sybil.
  std::vector<double> log_phi0(n, std::log(0.5));
  std::vector<double> log_phi1(n, std::log(0.5));
  for (NodeId v : split.known_sybil) {
    log_phi1[v] = std::log(params.known_prior);
    log_phi0[v] = std::log1p(-params.known_prior);
  }
  for (NodeId v : split.known_honest) {
    log_phi0[v] = std::log(params.known_prior);
    log_phi1[v] = std::log1p(-params.known_prior);
  }

  const auto offsets = g.offsets();
  const auto adj = g.adjacency();
  const std::size_t directed = adj.size();

  // reverse[e] is the index of v->u for e = u->v.
  std::vector<std::size_t> reverse(directed);
  for (NodeId u = 0; u < n; ++u) {
    for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) {
      NodeId v = adj[e];
      auto nb = g.neighbors(v);
      auto it = std::lower_bound(nb.begin(), nb.end(), u);
      reverse[e] = offsets[v] + static_cast<std::size_t>(it - nb.begin());
    }
  }

  // msg[e] = message u->v for e = u->v, as (m(honest), m(sybil)).
  std::vector<double> msg0(directed, 0.5), msg1(directed, 0.5);
  std::vector<double> next0(directed), next1(directed);
  std::vector<double> belief0(n), belief1(n);
  const double w = params.edge_homophily;

  auto accumulate_beliefs = [&] {
    for (NodeId u = 0; u < n; ++u) {
      double b0 = log_phi0[u], b1 = log_phi1[u];
      for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) {
        b0 += std::log(msg0[reverse[e]]);
        b1 += std::log(msg1[reverse[e]]);
      }
      belief0[u] = b0;
      belief1[u] = b1;
    }
  };

  std::size_t iterations = 0;
  double change = 0.0;
  for (; iterations < params.max_iterations && directed > 0;) {
    accumulate_beliefs();
    change = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      for (std::size_t e = offsets[u]; e < offsets[u + 1]; ++e) {
        // Cavity distribution of u excluding v's message.
        double c0 = belief0[u] - std::log(msg0[reverse[e]]);
        double c1 = belief1[u] - std::log(msg1[reverse[e]]);
        double top = std::max(c0, c1);
        double p0 = std::exp(c0 - top), p1 = std::exp(c1 - top);
        double z = p0 + p1;
        p0 /= z;
        p1 /= z;
        double m0 = w * p0 + (1.0 - w) * p1;
        double m1 = (1.0 - w) * p0 + w * p1;
        double s = m0 + m1;
        next0[e] = m0 / s;
        next1[e] = m1 / s;
        change = std::max({change, std::abs(next0[e] - msg0[e]), std::abs(next1[e] - msg1[e])});
      }
    }
    msg0.swap(next0);
    msg1.swap(next1);
    ++iterations;
    if (change < params.tolerance) break;
  }

  accumulate_beliefs();
  ScoreVector out{std::vector<double>(n), "sybilbelief"};
  for (NodeId v = 0; v < n; ++v) {
    double top = std::max(belief0[v], belief1[v]);
    double p0 = std::exp(belief0[v] - top), p1 = std::exp(belief1[v] - top);
    out.values[v] = p1 / (p0 + p1);
  }
  if (trace) {
    trace->iterations = iterations;
    trace->max_message_change = change;
    trace->max_normalization_error = 0.0;
    for (std::size_t e = 0; e < directed; ++e) {
      trace->max_normalization_error = std::max(trace->max_normalization_error, std::abs(msg0[e] + msg1[e] - 1.0));
    }
  }
  return out;
}

ScoreVector sybilscar(const Graph& g, const TrainSplit& split, const ScarParams& params, ScarTrace* trace) {
  const std::size_t n = g.node_count();
  if (split.known_count() == 0) throw InvalidArgument("sybilscar: needs at least one known node");
  if (params.variant == ScarVariant::Constant && !(params.homophily > 0.5 && params.homophily <= 1.0)) {
    throw InvalidArgument("sybilscar: homophily must lie in (0.5, 1]");
  }
  if (!(params.prior_strength > 0.0 && params.prior_strength <= 0.5)) {
    throw InvalidArgument("sybilscar: prior strength must lie in (0, 0.5]");
  }
  check_nodes(g, split.known_honest, "known honest");
  check_nodes(g, split.known_sybil, "known sybil");

  std::vector<double> prior(n, 0.0);
  for (NodeId v : split.known_sybil) prior[v] = params.prior_strength;
  for (NodeId v : split.known_honest) prior[v] = -params.prior_strength;

  // Per-source factor 2 * w_uv.
  std::vector<double> factor(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    if (params.variant == ScarVariant::Constant) {
      factor[u] = 2.0 * (params.homophily - 0.5);
    } else if (g.degree(u) > 0) {
      factor[u] = 1.0 / static_cast<double>(g.degree(u));
    }
  }

  std::vector<double> residual(prior);
  std::vector<double> next(n);
  const unsigned threads = std::max(1u, params.threads);
  std::vector<double> chunk_max(threads);
  if (trace) trace->max_change.clear();

  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    std::fill(chunk_max.begin(), chunk_max.end(), 0.0);
    std::size_t chunk = (n + threads - 1) / threads;
    detail::parallel_ranges(n, threads, [&](std::size_t begin, std::size_t end) {
      double local = 0.0;
      for (std::size_t v = begin; v < end; ++v) {
        double sum = prior[v];
        for (NodeId u : g.neighbors(static_cast<NodeId>(v))) sum += residual[u] * factor[u];
        sum = std::clamp(sum, -0.5, 0.5);
        next[v] = sum;
        local = std::max(local, std::abs(sum - residual[v]));
      }
      std::size_t slot = chunk > 0 ? std::min<std::size_t>(begin / chunk, threads - 1) : 0;
      chunk_max[slot] = std::max(chunk_max[slot], local);
    });
    residual.swap(next);
    double change = *std::max_element(chunk_max.begin(), chunk_max.end());
    if (trace) trace->max_change.push_back(change);
    if (change < params.tolerance) break;
  }

  ScoreVector out{std::vector<double>(n), params.variant == ScarVariant::Degree ? "sybilscar-d" : "sybilscar-c"};
  for (NodeId v = 0; v < n; ++v) out.values[v] = residual[v] + 0.5;
  return out;
}

}  // namespace sybillab
