#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sybillab/graph.hpp"
#include "sybillab/scores.hpp"

namespace sybillab {

/// How a directed edge list becomes undirected.
enum class Direction {
  Union,   // keep every pair
  Mutual,  // keep only pairs listed in both directions
};

/// How external node tokens become dense ids.
enum class IdPolicy {
  Densify,  // first-appearance order
  Numeric,  // tokens are integers used as ids; "# nodes N" header honored
};

/// External token for each dense id, plus the reverse index.
class IdMap {
 public:
  NodeId intern(const std::string& token);
  std::optional<NodeId> find(const std::string& token) const;
  const std::string& external(NodeId id) const { return external_[id]; }
  std::size_t size() const { return external_.size(); }

  static IdMap identity(std::size_t n);

 private:
  std::vector<std::string> external_;
  std::unordered_map<std::string, NodeId> index_;
};

struct LoadedGraph {
  Graph graph;
  IdMap ids;
};

/// Reads whitespace-separated "u v" lines; '#' lines and blank lines are
/// skipped, extra columns ignored. Throws IoError with the line number on a
/// malformed line.
LoadedGraph load_edge_list(const std::filesystem::path& path, Direction direction = Direction::Union,
                           IdPolicy ids = IdPolicy::Densify);

/// Numeric ids, union direction: the format written by write_edge_list.
Graph load_graph(const std::filesystem::path& path);

/// "# nodes N edges M" header, then "u v" with u < v, ascending.
void write_edge_list(const Graph& g, const std::filesystem::path& path);

void write_pairs(const std::vector<Edge>& pairs, const std::filesystem::path& path);
std::vector<Edge> load_pairs(const std::filesystem::path& path);

enum class UnlabeledPolicy {
  Reject,      // IoError if any graph node has no label
  MarkHonest,  // provisional honest label; node reported in `unlabeled`
};

struct LabelLoadResult {
  RegionLabels labels;
  std::vector<NodeId> unlabeled;
};

/// Lines "node_id label", label in {0, 1, honest, sybil}. Repeated
/// consistent labels are accepted; conflicting ones and unknown ids are errors.
LabelLoadResult load_labels(const std::filesystem::path& path, const IdMap& ids,
                            UnlabeledPolicy policy = UnlabeledPolicy::Reject);

/// "id honest|sybil" per node.
void write_labels(const RegionLabels& labels, const std::filesystem::path& path);

/// Known nodes in label-file format (only nodes listed are known).
void write_split(const TrainSplit& split, const std::filesystem::path& path);
TrainSplit load_split(const std::filesystem::path& path, std::size_t node_count);

/// "node,score[,label]" with six significant digits. When threshold is set a
/// binary label column (score >= threshold) is added.
void write_scores(const ScoreVector& scores, const std::filesystem::path& path,
                  std::optional<double> threshold = std::nullopt);
ScoreVector load_scores(const std::filesystem::path& path);

/// One experiment run.
struct RunRecord {
  std::string experiment;
  std::string dataset;
  std::string model;
  std::string algorithm;
  std::uint64_t seed = 0;
  double attack_edges_per_sybil = 0.0;
  double p_targeted = 0.0;
  double auc = 0.0;
  double wall_ms = 0.0;
  double threshold = 0.5;
  int train_epochs = 0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

enum class ResultFormat { Csv, Json };

void write_results(const std::vector<RunRecord>& rows, const std::filesystem::path& path, ResultFormat format);
std::vector<RunRecord> load_results(const std::filesystem::path& path);

/// Infers the format from the extension (.json, otherwise CSV).
ResultFormat format_for(const std::filesystem::path& path);

}  // namespace sybillab
