#include "sybillab/sybillab.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "sybillab/baselines.hpp"
#include "sybillab/config_json.hpp"
#include "sybillab/error.hpp"
#include "sybillab/eval.hpp"
#include "sybillab/gat.hpp"
#include "sybillab/harness.hpp"
#include "sybillab/io.hpp"
#include "sybillab/sampling.hpp"
#include "sybillab/synthesis.hpp"

using namespace sybillab;
namespace fs = std::filesystem;

struct sl_graph {
  Graph graph;
};
struct sl_labels {
  RegionLabels labels;
};
struct sl_split {
  TrainSplit split;
};
struct sl_network {
  LabeledNetwork net;
  std::optional<json> spec;
};
struct sl_sample {
  SampleResult result;
};
struct sl_scores {
  ScoreVector scores;
};
struct sl_model {
  GatModel model;
  double threshold = 0.5;
  std::optional<TrainReport> report;
};
struct sl_experiment {
  ExperimentConfig config;
};
struct sl_records {
  std::vector<RunRecord> rows;
};

namespace {

thread_local std::string last_error;

template <typename F>
sl_status guarded(F&& body) {
  try {
    body();
    return SL_OK;
  } catch (const InvalidArgument& e) {
    last_error = e.what();
    return SL_INVALID_ARGUMENT;
  } catch (const IoError& e) {
    last_error = e.what();
    return SL_IO_ERROR;
  } catch (const RuntimeFailure& e) {
    last_error = e.what();
    return SL_RUNTIME_FAILURE;
  } catch (const json::exception& e) {
    last_error = e.what();
    return SL_INVALID_ARGUMENT;
  } catch (const fs::filesystem_error& e) {
    last_error = e.what();
    return SL_IO_ERROR;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SL_RUNTIME_FAILURE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SL_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return SL_INTERNAL_ERROR;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void check_size(const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    throw InvalidArgument(std::string(what) + " covers " + std::to_string(got) + " nodes, graph has " +
                          std::to_string(want));
  }
}

json report_to_json(const TrainReport& r) {
  return {{"train_loss", r.train_loss},
          {"validation_loss", r.validation_loss},
          {"initial_train_loss", r.initial_train_loss},
          {"best_epoch", r.best_epoch},
          {"epochs_run", r.epochs_run},
          {"stopped_early", r.stopped_early},
          {"threshold", r.threshold},
          {"seed", r.seed},
          {"fit_nodes", r.fit_nodes},
          {"validation_nodes", r.validation_nodes}};
}

}  // namespace

extern "C" {

const char* sl_version(void) { return "0.1.0"; }
const char* sl_last_error(void) { return last_error.c_str(); }

const char* sl_status_name(sl_status status) {
  switch (status) {
    case SL_OK: return "ok";
    case SL_INVALID_ARGUMENT: return "invalid argument";
    case SL_IO_ERROR: return "i/o error";
    case SL_RUNTIME_FAILURE: return "runtime failure";
    case SL_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

void sl_string_free(char* s) { std::free(s); }

// ---- graphs

sl_status sl_graph_load(const char* path, sl_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sl_graph{load_graph(path)};
  });
}

sl_status sl_graph_load_edge_list(const char* path, sl_direction direction, sl_graph** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto dir = direction == SL_DIRECTION_MUTUAL ? Direction::Mutual : Direction::Union;
    *out = new sl_graph{load_edge_list(path, dir).graph};
  });
}

sl_status sl_graph_save(const sl_graph* g, const char* path) {
  return guarded([&] {
    require(g, "graph");
    require(path, "path");
    write_edge_list(g->graph, path);
  });
}

size_t sl_graph_node_count(const sl_graph* g) { return g ? g->graph.node_count() : 0; }
size_t sl_graph_edge_count(const sl_graph* g) { return g ? g->graph.edge_count() : 0; }
void sl_graph_free(sl_graph* g) { delete g; }

sl_status sl_labels_load(const char* path, size_t node_count, sl_labels** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sl_labels{load_labels(path, IdMap::identity(node_count)).labels};
  });
}

void sl_labels_free(sl_labels* labels) { delete labels; }

sl_status sl_split_load(const char* path, size_t node_count, sl_split** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sl_split{load_split(path, node_count)};
  });
}

size_t sl_split_known_honest(const sl_split* s) { return s ? s->split.known_honest.size() : 0; }
size_t sl_split_known_sybil(const sl_split* s) { return s ? s->split.known_sybil.size() : 0; }
void sl_split_free(sl_split* split) { delete split; }

// ---- synthesis

sl_status sl_network_synthesize(const char* spec_json, const uint64_t* seed_override, const char* base_dir,
                                sl_network** out) {
  return guarded([&] {
    require(spec_json, "spec");
    require(out, "out");
    SynthSpec spec = synth_from_json(json::parse(spec_json));
    if (seed_override) spec.seed = *seed_override;
    resolve_region_paths(spec, base_dir ? fs::path(base_dir) : fs::current_path());
    auto net = std::make_unique<sl_network>();
    net->net = synthesize_network(spec);
    net->spec = synth_to_json(spec);
    *out = net.release();
  });
}

sl_status sl_network_save(const sl_network* net, const char* dir) {
  return guarded([&] {
    require(net, "network");
    require(dir, "dir");
    fs::path d(dir);
    fs::create_directories(d);
    write_edge_list(net->net.graph, d / "graph.txt");
    write_labels(net->net.regions, d / "labels.txt");
    write_split(net->net.split, d / "split.txt");
    write_pairs(net->net.attack_edges, d / "attack_edges.txt");
    if (net->spec) write_json_file(*net->spec, d / "spec.json");
  });
}

sl_status sl_network_load(const char* dir, sl_network** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    fs::path d(dir);
    auto net = std::make_unique<sl_network>();
    net->net.graph = load_graph(d / "graph.txt");
    const std::size_t n = net->net.graph.node_count();
    net->net.regions = load_labels(d / "labels.txt", IdMap::identity(n)).labels;
    net->net.split = load_split(d / "split.txt", n);
    net->net.split.validate(net->net.regions);
    if (fs::exists(d / "attack_edges.txt")) net->net.attack_edges = load_pairs(d / "attack_edges.txt");
    if (fs::exists(d / "spec.json")) net->spec = read_json_file(d / "spec.json");
    *out = net.release();
  });
}

void sl_network_get_info(const sl_network* net, sl_network_info* info) {
  if (!net || !info) return;
  const auto& n = net->net;
  info->nodes = n.graph.node_count();
  info->edges = n.graph.edge_count();
  info->honest = n.regions.honest_count();
  info->sybil = n.regions.sybil_count();
  info->attack_edges = n.attack_edges.size();
  info->known_honest = n.split.known_honest.size();
  info->known_sybil = n.split.known_sybil.size();
}

sl_status sl_network_graph(const sl_network* net, sl_graph** out) {
  return guarded([&] {
    require(net, "network");
    require(out, "out");
    *out = new sl_graph{net->net.graph};
  });
}

sl_status sl_network_split(const sl_network* net, sl_split** out) {
  return guarded([&] {
    require(net, "network");
    require(out, "out");
    *out = new sl_split{net->net.split};
  });
}

sl_status sl_network_labels(const sl_network* net, sl_labels** out) {
  return guarded([&] {
    require(net, "network");
    require(out, "out");
    *out = new sl_labels{net->net.regions};
  });
}

void sl_network_free(sl_network* net) { delete net; }

// ---- sampling

sl_status sl_sample_forest_fire(const sl_graph* g, double fraction, double burn_probability, uint64_t seed,
                                sl_sample** out) {
  return guarded([&] {
    require(g, "graph");
    require(out, "out");
    Rng rng = Rng::derive(seed, "sampling");
    *out = new sl_sample{forest_fire_sample(g->graph, fraction, burn_probability, rng)};
  });
}

sl_status sl_sample_subgraph(const sl_sample* sample, sl_graph** out) {
  return guarded([&] {
    require(sample, "sample");
    require(out, "out");
    *out = new sl_graph{sample->result.subgraph};
  });
}

void sl_sample_node_map(const sl_sample* sample, const uint32_t** data, size_t* count) {
  if (!sample) return;
  if (data) *data = sample->result.node_map.data();
  if (count) *count = sample->result.node_map.size();
}

sl_status sl_sample_save_node_map(const sl_sample* sample, const char* path) {
  return guarded([&] {
    require(sample, "sample");
    require(path, "path");
    std::FILE* f = std::fopen(path, "w");
    if (!f) throw IoError(std::string("cannot open ") + path + " for writing");
    for (NodeId v : sample->result.node_map) std::fprintf(f, "%u\n", v);
    if (std::fclose(f) != 0) throw IoError(std::string("write failed: ") + path);
  });
}

sl_status sl_sample_labels(const sl_sample* sample, const sl_labels* labels, sl_labels** out) {
  return guarded([&] {
    require(sample, "sample");
    require(labels, "labels");
    require(out, "out");
    for (NodeId v : sample->result.node_map) {
      if (v >= labels->labels.size()) throw InvalidArgument("labels do not cover the sampled graph");
    }
    *out = new sl_labels{restrict_labels(labels->labels, sample->result.node_map)};
  });
}

sl_status sl_labels_save(const sl_labels* labels, const char* path) {
  return guarded([&] {
    require(labels, "labels");
    require(path, "path");
    write_labels(labels->labels, path);
  });
}

void sl_sample_free(sl_sample* sample) { delete sample; }

// ---- detection

sl_status sl_detect(const char* algorithm, const sl_graph* g, const sl_split* split, unsigned threads,
                    sl_scores** out) {
  return guarded([&] {
    require(algorithm, "algorithm");
    require(g, "graph");
    require(split, "split");
    require(out, "out");
    std::string name = algorithm;
    if (name.rfind("sybilgat", 0) == 0) throw InvalidArgument("the GAT detector runs through train and predict");
    AlgorithmSpec algo{name, 2};
    DetectorRun run = run_detector(algo, g->graph, split->split, GatHyper{}, 0, nullptr, threads);
    *out = new sl_scores{std::move(run.scores)};
  });
}

size_t sl_scores_size(const sl_scores* s) { return s ? s->scores.size() : 0; }
const double* sl_scores_data(const sl_scores* s) { return s ? s->scores.values.data() : nullptr; }
const char* sl_scores_detector(const sl_scores* s) { return s ? s->scores.detector.c_str() : ""; }

sl_status sl_scores_save(const sl_scores* scores, const char* path, int with_threshold, double threshold) {
  return guarded([&] {
    require(scores, "scores");
    require(path, "path");
    write_scores(scores->scores, path, with_threshold ? std::optional<double>(threshold) : std::nullopt);
  });
}

sl_status sl_scores_load(const char* path, sl_scores** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sl_scores{load_scores(path)};
  });
}

void sl_scores_free(sl_scores* scores) { delete scores; }

// ---- GAT

sl_status sl_train(const sl_graph* g, const sl_split* split, const char* hyper_json, const uint64_t* seed_override,
                   sl_model** out) {
  return guarded([&] {
    require(g, "graph");
    require(split, "split");
    require(out, "out");
    GatHyper hyper;
    if (hyper_json && *hyper_json) hyper = hyper_from_json(json::parse(hyper_json));
    if (seed_override) hyper.seed = *seed_override;
    TrainedModel t = train_gat(g->graph, split->split, hyper);
    auto m = std::make_unique<sl_model>();
    m->threshold = t.report.threshold;
    m->model = std::move(t.model);
    m->report = std::move(t.report);
    *out = m.release();
  });
}

char* sl_model_report_json(const sl_model* model) {
  if (!model || !model->report) return nullptr;
  return dup_string(report_to_json(*model->report).dump(1));
}

double sl_model_threshold(const sl_model* model) { return model ? model->threshold : 0.5; }

sl_status sl_model_save(const sl_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    save_checkpoint(model->model, model->threshold, path);
  });
}

sl_status sl_model_load(const char* path, sl_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    Checkpoint cp = load_checkpoint(path);
    auto m = std::make_unique<sl_model>();
    m->model = std::move(cp.model);
    m->threshold = cp.threshold;
    *out = m.release();
  });
}

void sl_model_free(sl_model* model) { delete model; }

sl_status sl_predict(const sl_model* model, const sl_graph* g, const sl_split* known, uint64_t seed, sl_scores** out,
                     double* threshold) {
  return guarded([&] {
    require(model, "model");
    require(g, "graph");
    require(known, "known");
    require(out, "out");
    Prediction p = predict(model->model, g->graph, known->split, seed);
    if (threshold) *threshold = p.threshold;
    *out = new sl_scores{std::move(p.scores)};
  });
}

sl_status sl_predict_scores(const sl_model* model, const sl_graph* g, const sl_split* known, sl_scores** out) {
  return guarded([&] {
    require(model, "model");
    require(g, "graph");
    require(known, "known");
    require(out, "out");
    *out = new sl_scores{predict_scores(model->model, g->graph, known->split)};
  });
}

// ---- evaluation

sl_status sl_evaluate(const sl_scores* scores, const sl_labels* labels, const sl_split* split, double threshold,
                      sl_eval_result* out) {
  return guarded([&] {
    require(scores, "scores");
    require(labels, "labels");
    require(out, "out");
    const std::size_t n = scores->scores.size();
    check_size("labels", labels->labels.size(), n);
    std::vector<NodeId> nodes;
    if (split) {
      split->split.validate(labels->labels);
      nodes = split->split.test_nodes(n);
    } else {
      nodes.resize(n);
      for (std::size_t v = 0; v < n; ++v) nodes[v] = static_cast<NodeId>(v);
    }
    std::vector<double> s;
    std::vector<Label> l;
    for (NodeId v : nodes) {
      s.push_back(scores->scores[v]);
      l.push_back(labels->labels[v]);
    }
    EvalResult r = evaluate(s, l, threshold);
    *out = {r.auc, r.at_threshold.accuracy, r.at_threshold.precision, r.at_threshold.recall, nodes.size()};
  });
}

// ---- experiments

sl_status sl_experiment_load(const char* config_path, sl_experiment** out) {
  return guarded([&] {
    require(config_path, "config path");
    require(out, "out");
    *out = new sl_experiment{load_experiment_config(config_path)};
  });
}

const char* sl_experiment_output(const sl_experiment* exp) { return exp ? exp->config.output.c_str() : ""; }
const char* sl_experiment_name(const sl_experiment* exp) { return exp ? exp->config.name.c_str() : ""; }
void sl_experiment_free(sl_experiment* exp) { delete exp; }

sl_status sl_experiment_run(const sl_experiment* exp, const sl_run_options* options, sl_records** out) {
  return guarded([&] {
    require(exp, "experiment");
    require(out, "out");
    RunOptions opt;
    if (options) {
      opt.workers = options->workers == 0 ? 1 : options->workers;
      opt.record_timing = options->record_timing != 0;
      opt.allow_large = options->allow_large != 0;
      if (options->has_seed) opt.seed = options->seed;
    }
    *out = new sl_records{run_experiment(exp->config, opt)};
  });
}

size_t sl_records_count(const sl_records* r) { return r ? r->rows.size() : 0; }

sl_status sl_records_save(const sl_records* records, const char* path) {
  return guarded([&] {
    require(records, "records");
    require(path, "path");
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_results(records->rows, p, format_for(p));
  });
}

sl_status sl_records_load(const char* path, sl_records** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new sl_records{load_results(path)};
  });
}

sl_status sl_records_save_plot_data(const sl_records* records, const char* path) {
  return guarded([&] {
    require(records, "records");
    require(path, "path");
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_plot_series(plot_series(records->rows), p);
  });
}

char* sl_records_summary(const sl_records* records) {
  if (!records) return nullptr;
  std::ostringstream out;
  out << "experiment,dataset,model,algorithm,attack_edges_per_sybil,p_targeted,runs,mean_auc,std_auc\n";
  char buf[96];
  for (const auto& c : aggregate(records->rows)) {
    std::snprintf(buf, sizeof buf, "%g,%g,%zu,%.4f,%.4f", c.key.attack_edges_per_sybil, c.key.p_targeted, c.runs,
                  c.mean_auc, c.std_auc);
    out << c.key.experiment << ',' << c.key.dataset << ',' << c.key.model << ',' << c.key.algorithm << ',' << buf
        << '\n';
  }
  return dup_string(out.str());
}

void sl_records_free(sl_records* records) { delete records; }

}  // extern "C"
