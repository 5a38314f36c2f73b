#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sybillab/config_json.hpp"
#include "sybillab/gat.hpp"
#include "sybillab/io.hpp"
#include "sybillab/synthesis.hpp"

namespace sybillab {

/// A detector and its parameters as named in result files.
struct AlgorithmSpec {
  std::string name;  // sybilrank | sybilbelief | sybilscar-c | sybilscar-d | sybilgat
  int gat_layers = 2;
  std::string label() const;  // "sybilgat-l2" style for the GAT, else name
};

/// A network built from one labeled edge file (e.g. a crawled dataset)
/// instead of two synthetic regions.
struct DatasetSource {
  std::string edges;
  std::string labels;
  Direction direction = Direction::Union;
  double honest_known_fraction = 0.05;
  double sybil_known_fraction = 0.05;
};

/// One row block of an experiment (e.g. "BA-BA random").
struct ExperimentCase {
  std::string dataset;  // free-form, copied to records
  std::string model;    // e.g. "PL-PL"
  SynthSpec network;    // evaluated network; its seed is replaced per run
  std::optional<DatasetSource> source;  // replaces `network` regions when set

  // Experiment 1
  double sample_fraction = 0.1;
  double burn_probability = 0.4;
  double pretrain_known_fraction = 0.05;

  // Experiment 2
  std::optional<SynthSpec> pretrain;

  // Experiment 3: the shared regions are first attacked with this config for
  // pretraining, then re-attacked with network.attack for evaluation.
  std::optional<AttackConfig> pretrain_attack;

  // Experiment 4: sweep of edges_per_sybil; empty means the spec value only.
  std::vector<double> attack_counts;
};

struct ExperimentConfig {
  int experiment = 4;  // 1: sampled pretraining, 2: small-to-large, 3: re-attack, 4: transductive
  std::string name;
  std::vector<std::uint64_t> seeds{42, 43, 44, 45, 46};
  std::vector<AlgorithmSpec> algorithms;
  GatHyper gat;  // depth comes from each AlgorithmSpec
  std::vector<ExperimentCase> cases;
  bool large = false;  // needs RunOptions::allow_large
  std::string output;  // default result path, relative to the caller's cwd

  void validate() const;
};

/// Reads a config file; relative data paths resolve against
/// $SYBILLAB_DATA_DIR, else against <config dir>/../../data.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& data_dir);

struct RunOptions {
  unsigned workers = 1;
  bool record_timing = false;  // wall_ms stays 0 otherwise, keeping output byte-stable
  bool allow_large = false;
  std::optional<std::uint64_t> seed;  // replaces the seed list with this one seed
  unsigned detector_threads = 1;
};

/// Runs every (case, attack count, seed) cell; records come back ordered by
/// case, attack count, seed, algorithm regardless of worker count.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Scores of one detector. For the GAT, `pretrained` (if given) replaces
/// training on (g, split).
struct DetectorRun {
  ScoreVector scores;
  double threshold = 0.5;
  int train_epochs = 0;
};
DetectorRun run_detector(const AlgorithmSpec& algo, const Graph& g, const TrainSplit& split, const GatHyper& gat,
                         std::uint64_t seed, const GatModel* pretrained = nullptr, unsigned threads = 1);

struct CellKey {
  std::string experiment, dataset, model, algorithm;
  double attack_edges_per_sybil = 0.0;
  double p_targeted = 0.0;
  auto operator<=>(const CellKey&) const = default;
};

struct CellSummary {
  CellKey key;
  std::size_t runs = 0;
  double mean_auc = 0.0;
  double std_auc = 0.0;  // sample standard deviation, 0 for a single run
};

/// Group-by over CellKey, in key order.
std::vector<CellSummary> aggregate(const std::vector<RunRecord>& records);

struct PlotPoint {
  double x = 0.0;  // attack edges per Sybil
  double mean = 0.0;
  double std = 0.0;
};

struct PlotSeries {
  std::string experiment, dataset, model, algorithm;
  double p_targeted = 0.0;
  std::vector<PlotPoint> points;  // ascending x
};

std::vector<PlotSeries> plot_series(const std::vector<RunRecord>& records);
/// Long format: experiment,dataset,model,algorithm,p_targeted,x,mean_auc,std_auc
void write_plot_series(const std::vector<PlotSeries>& series, const std::filesystem::path& path);

/// Record order used to compare runs irrespective of scheduling.
void canonical_sort(std::vector<RunRecord>& records);

/// Spearman rank correlation with midranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sybillab
