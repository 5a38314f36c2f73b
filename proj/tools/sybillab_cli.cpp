// sybillab command-line tool. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sybillab/sybillab.h"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

struct Failure {
  int code;
  std::string message;
};

void check(sl_status status, const std::string& context) {
  if (status == SL_OK) return;
  int code = status == SL_INVALID_ARGUMENT ? kUsageError : kRuntimeError;
  throw Failure{code, context + ": " + sl_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using GraphPtr = std::unique_ptr<sl_graph, Deleter<sl_graph, sl_graph_free>>;
using LabelsPtr = std::unique_ptr<sl_labels, Deleter<sl_labels, sl_labels_free>>;
using SplitPtr = std::unique_ptr<sl_split, Deleter<sl_split, sl_split_free>>;
using NetworkPtr = std::unique_ptr<sl_network, Deleter<sl_network, sl_network_free>>;
using SamplePtr = std::unique_ptr<sl_sample, Deleter<sl_sample, sl_sample_free>>;
using ScoresPtr = std::unique_ptr<sl_scores, Deleter<sl_scores, sl_scores_free>>;
using ModelPtr = std::unique_ptr<sl_model, Deleter<sl_model, sl_model_free>>;
using ExperimentPtr = std::unique_ptr<sl_experiment, Deleter<sl_experiment, sl_experiment_free>>;
using RecordsPtr = std::unique_ptr<sl_records, Deleter<sl_records, sl_records_free>>;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kRuntimeError, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GraphPtr load_graph(const std::string& path, const std::string& format, const std::string& direction) {
  sl_graph* g = nullptr;
  if (format == "snap") {
    auto dir = direction == "mutual" ? SL_DIRECTION_MUTUAL : SL_DIRECTION_UNION;
    check(sl_graph_load_edge_list(path.c_str(), dir, &g), "loading " + path);
  } else {
    check(sl_graph_load(path.c_str(), &g), "loading " + path);
  }
  return GraphPtr(g);
}

SplitPtr load_split(const std::string& path, const sl_graph* g) {
  sl_split* s = nullptr;
  check(sl_split_load(path.c_str(), sl_graph_node_count(g), &s), "loading " + path);
  return SplitPtr(s);
}

// Finds a relative config under $SYBILLAB_CONFIG_DIR when it is not found as given.
std::string resolve_config(const std::string& path) {
  if (fs::exists(path) || fs::path(path).is_absolute()) return path;
  if (const char* dir = std::getenv("SYBILLAB_CONFIG_DIR"); dir && *dir) {
    fs::path p = fs::path(dir) / path;
    if (fs::exists(p)) return p.string();
    // Allow "exp4/pl.json" with a config dir that already ends in configs/.
    fs::path rel(path);
    if (rel.begin() != rel.end() && *rel.begin() == "configs") {
      fs::path tail;
      for (auto it = std::next(rel.begin()); it != rel.end(); ++it) tail /= *it;
      p = fs::path(dir) / tail;
      if (fs::exists(p)) return p.string();
    }
  }
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-based Sybil detection laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sl_version());

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a labeled, attacked network");
  std::string synth_spec, synth_out;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--spec", synth_spec, "Network spec JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the spec seed");

  // sample
  auto* sample = app.add_subcommand("sample", "Forest-fire sample of a graph");
  std::string sample_graph, sample_out, sample_labels;
  double sample_fraction = 0.1, sample_burn = 0.4;
  std::uint64_t sample_seed = 42;
  sample->add_option("--graph", sample_graph, "Graph edge list")->required()->check(CLI::ExistingFile);
  sample->add_option("--fraction", sample_fraction, "Share of nodes to sample")->capture_default_str();
  sample->add_option("--burn-p", sample_burn, "Burning probability")->capture_default_str();
  sample->add_option("--labels", sample_labels, "Labels to restrict to the sample")->check(CLI::ExistingFile);
  sample->add_option("--seed", sample_seed, "Random seed")->capture_default_str();
  sample->add_option("--out", sample_out, "Output directory (graph.txt, node_map.txt[, labels.txt])")->required();

  // detect
  auto* detect = app.add_subcommand("detect", "Run a propagation detector");
  std::string detect_algo, detect_graph, detect_split, detect_out;
  unsigned detect_threads = 1;
  detect->add_option("--algo", detect_algo, "Detector")
      ->required()
      ->check(CLI::IsMember({"sybilrank", "sybilbelief", "sybilscar-c", "sybilscar-d"}));
  detect->add_option("--graph", detect_graph, "Graph edge list")->required()->check(CLI::ExistingFile);
  detect->add_option("--split", detect_split, "Known nodes")->required()->check(CLI::ExistingFile);
  detect->add_option("--out", detect_out, "Score CSV")->required();
  detect->add_option("--threads", detect_threads, "Sweep threads")->capture_default_str();
  detect->add_option("--seed", sample_seed, "Accepted for uniformity; detectors are deterministic");

  // train
  auto* train = app.add_subcommand("train", "Train a GAT detector");
  std::string train_graph, train_split, train_hyper, train_out, train_report;
  std::optional<std::uint64_t> train_seed;
  train->add_option("--graph", train_graph, "Graph edge list")->required()->check(CLI::ExistingFile);
  train->add_option("--split", train_split, "Known nodes")->required()->check(CLI::ExistingFile);
  train->add_option("--hyper", train_hyper, "Hyperparameter JSON")->check(CLI::ExistingFile);
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--report", train_report, "Training report JSON (default <out>.report.json)");
  train->add_option("--seed", train_seed, "Override the hyperparameter seed");

  // predict
  auto* predict = app.add_subcommand("predict", "Apply a trained GAT detector");
  std::string predict_model, predict_graph, predict_known, predict_out;
  std::optional<double> predict_threshold;
  std::uint64_t predict_seed = 42;
  predict->add_option("--model", predict_model, "Checkpoint")->required()->check(CLI::ExistingFile);
  predict->add_option("--graph", predict_graph, "Graph edge list")->required()->check(CLI::ExistingFile);
  predict->add_option("--known", predict_known, "Known nodes of the target graph")->required()->check(
      CLI::ExistingFile);
  predict->add_option("--out", predict_out, "Score CSV with labels")->required();
  predict->add_option("--threshold", predict_threshold,
                      "Fixed threshold; all known nodes become input instead of holding some out");
  predict->add_option("--seed", predict_seed, "Seed of the threshold hold-out")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "AUC of a score file");
  std::string eval_scores, eval_labels, eval_split;
  double eval_threshold = 0.5;
  eval->add_option("--scores", eval_scores, "Score CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", eval_labels, "Ground-truth labels")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "Known nodes to exclude")->check(CLI::ExistingFile);
  eval->add_option("--threshold", eval_threshold, "Threshold for accuracy/precision/recall")->capture_default_str();
  eval->add_option("--seed", sample_seed, "Accepted for uniformity; evaluation is deterministic");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run an experiment config");
  std::string exp_config, exp_out;
  std::optional<std::uint64_t> exp_seed;
  unsigned exp_workers = 1;
  bool exp_timing = false, exp_large = false, exp_quiet = false;
  experiment->add_option("--config", exp_config, "Experiment JSON (also looked up in $SYBILLAB_CONFIG_DIR)")
      ->required();
  experiment->add_option("--seed", exp_seed, "Run only this seed");
  experiment->add_option("--workers", exp_workers, "Parallel work items")->capture_default_str()->check(
      CLI::PositiveNumber);
  experiment->add_option("--out", exp_out, "Result file (.csv or .json)");
  experiment->add_flag("--record-timing", exp_timing, "Fill wall_ms (output is then not byte-stable)");
  experiment->add_flag("--allow-large", exp_large, "Permit configs marked large");
  experiment->add_flag("--quiet", exp_quiet, "Skip the summary table");

  // plot-data
  auto* plot = app.add_subcommand("plot-data", "Mean/std curves over attack edges per Sybil");
  std::string plot_results, plot_out;
  plot->add_option("--results", plot_results, "Result file")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "Series CSV")->required();

  std::string graph_format = "numeric", graph_direction = "union";
  for (auto* sub : {sample, detect, train, predict}) {
    sub->add_option("--graph-format", graph_format, "numeric (own format) or snap (arbitrary tokens)")
        ->check(CLI::IsMember({"numeric", "snap"}))
        ->capture_default_str();
    sub->add_option("--direction", graph_direction, "Directed input: union or mutual")
        ->check(CLI::IsMember({"union", "mutual"}))
        ->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*synth) {
      std::string text = read_text(synth_spec);
      std::string base = fs::absolute(synth_spec).parent_path().string();
      sl_network* raw = nullptr;
      check(sl_network_synthesize(text.c_str(), synth_seed ? &*synth_seed : nullptr, base.c_str(), &raw),
            "synthesizing");
      NetworkPtr net(raw);
      check(sl_network_save(net.get(), synth_out.c_str()), "writing " + synth_out);
      sl_network_info info{};
      sl_network_get_info(net.get(), &info);
      std::printf("nodes=%zu edges=%zu honest=%zu sybil=%zu attack_edges=%zu known_honest=%zu known_sybil=%zu\n",
                  info.nodes, info.edges, info.honest, info.sybil, info.attack_edges, info.known_honest,
                  info.known_sybil);
    } else if (*sample) {
      GraphPtr g = load_graph(sample_graph, graph_format, graph_direction);
      sl_sample* raw = nullptr;
      check(sl_sample_forest_fire(g.get(), sample_fraction, sample_burn, sample_seed, &raw), "sampling");
      SamplePtr s(raw);
      fs::create_directories(sample_out);
      sl_graph* sub = nullptr;
      check(sl_sample_subgraph(s.get(), &sub), "sampling");
      GraphPtr subgraph(sub);
      std::string out_graph = (fs::path(sample_out) / "graph.txt").string();
      check(sl_graph_save(subgraph.get(), out_graph.c_str()), "writing " + out_graph);
      std::string out_map = (fs::path(sample_out) / "node_map.txt").string();
      check(sl_sample_save_node_map(s.get(), out_map.c_str()), "writing " + out_map);
      if (!sample_labels.empty()) {
        sl_labels* raw_labels = nullptr;
        check(sl_labels_load(sample_labels.c_str(), sl_graph_node_count(g.get()), &raw_labels),
              "loading " + sample_labels);
        LabelsPtr labels(raw_labels);
        sl_labels* restricted = nullptr;
        check(sl_sample_labels(s.get(), labels.get(), &restricted), "restricting labels");
        LabelsPtr sub_labels(restricted);
        std::string out_labels = (fs::path(sample_out) / "labels.txt").string();
        check(sl_labels_save(sub_labels.get(), out_labels.c_str()), "writing " + out_labels);
      }
      std::printf("nodes=%zu edges=%zu\n", sl_graph_node_count(subgraph.get()), sl_graph_edge_count(subgraph.get()));
    } else if (*detect) {
      GraphPtr g = load_graph(detect_graph, graph_format, graph_direction);
      SplitPtr split = load_split(detect_split, g.get());
      sl_scores* raw = nullptr;
      check(sl_detect(detect_algo.c_str(), g.get(), split.get(), detect_threads, &raw), detect_algo);
      ScoresPtr scores(raw);
      check(sl_scores_save(scores.get(), detect_out.c_str(), 0, 0.0), "writing " + detect_out);
    } else if (*train) {
      GraphPtr g = load_graph(train_graph, graph_format, graph_direction);
      SplitPtr split = load_split(train_split, g.get());
      std::string hyper = train_hyper.empty() ? std::string{} : read_text(train_hyper);
      sl_model* raw = nullptr;
      check(sl_train(g.get(), split.get(), hyper.empty() ? nullptr : hyper.c_str(), train_seed ? &*train_seed : nullptr,
                     &raw),
            "training");
      ModelPtr model(raw);
      check(sl_model_save(model.get(), train_out.c_str()), "writing " + train_out);
      std::string report_path = train_report.empty() ? train_out + ".report.json" : train_report;
      char* report = sl_model_report_json(model.get());
      std::ofstream(report_path) << report << '\n';
      sl_string_free(report);
      std::printf("threshold=%.6f\n", sl_model_threshold(model.get()));
    } else if (*predict) {
      sl_model* raw_model = nullptr;
      check(sl_model_load(predict_model.c_str(), &raw_model), "loading " + predict_model);
      ModelPtr model(raw_model);
      GraphPtr g = load_graph(predict_graph, graph_format, graph_direction);
      SplitPtr known = load_split(predict_known, g.get());
      sl_scores* raw = nullptr;
      double threshold = 0.5;
      if (predict_threshold) {
        threshold = *predict_threshold;
        check(sl_predict_scores(model.get(), g.get(), known.get(), &raw), "predicting");
      } else {
        check(sl_predict(model.get(), g.get(), known.get(), predict_seed, &raw, &threshold), "predicting");
      }
      ScoresPtr scores(raw);
      check(sl_scores_save(scores.get(), predict_out.c_str(), 1, threshold), "writing " + predict_out);
      std::printf("threshold=%.6f\n", threshold);
    } else if (*eval) {
      sl_scores* raw = nullptr;
      check(sl_scores_load(eval_scores.c_str(), &raw), "loading " + eval_scores);
      ScoresPtr scores(raw);
      const size_t n = sl_scores_size(scores.get());
      sl_labels* raw_labels = nullptr;
      check(sl_labels_load(eval_labels.c_str(), n, &raw_labels), "loading " + eval_labels);
      LabelsPtr labels(raw_labels);
      SplitPtr split;
      if (!eval_split.empty()) {
        sl_split* raw_split = nullptr;
        check(sl_split_load(eval_split.c_str(), n, &raw_split), "loading " + eval_split);
        split.reset(raw_split);
      }
      sl_eval_result r{};
      check(sl_evaluate(scores.get(), labels.get(), split.get(), eval_threshold, &r), "evaluating");
      std::printf("auc=%.6f\n", r.auc);
      std::printf("accuracy=%.6f precision=%.6f recall=%.6f nodes=%zu\n", r.accuracy, r.precision, r.recall,
                  r.evaluated);
    } else if (*experiment) {
      std::string config = resolve_config(exp_config);
      sl_experiment* raw_exp = nullptr;
      check(sl_experiment_load(config.c_str(), &raw_exp), "loading " + config);
      ExperimentPtr exp(raw_exp);
      sl_run_options opt{exp_workers, exp_timing ? 1 : 0, exp_large ? 1 : 0, exp_seed ? 1 : 0,
                         exp_seed.value_or(0)};
      sl_records* raw = nullptr;
      check(sl_experiment_run(exp.get(), &opt, &raw), "running " + config);
      RecordsPtr records(raw);
      std::string out = exp_out;
      if (out.empty()) out = sl_experiment_output(exp.get());
      if (out.empty()) out = std::string("results/") + sl_experiment_name(exp.get()) + ".csv";
      check(sl_records_save(records.get(), out.c_str()), "writing " + out);
      if (!exp_quiet) {
        char* summary = sl_records_summary(records.get());
        std::fputs(summary, stdout);
        sl_string_free(summary);
      }
      std::fprintf(stderr, "%zu records -> %s\n", sl_records_count(records.get()), out.c_str());
    } else if (*plot) {
      sl_records* raw = nullptr;
      check(sl_records_load(plot_results.c_str(), &raw), "loading " + plot_results);
      RecordsPtr records(raw);
      check(sl_records_save_plot_data(records.get(), plot_out.c_str()), "writing " + plot_out);
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return 0;
}
