#include "sybillab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "sybillab/baselines.hpp"
#include "sybillab/error.hpp"
#include "sybillab/eval.hpp"
#include "sybillab/sampling.hpp"

namespace sybillab {

std::string AlgorithmSpec::label() const {
  if (name == "sybilgat") return "sybilgat-l" + std::to_string(gat_layers);
  return name;
}

namespace {

const char* const kDetectors[] = {"sybilrank", "sybilbelief", "sybilscar-c", "sybilscar-d", "sybilgat"};

AlgorithmSpec parse_algorithm(const json& j) {
  AlgorithmSpec a;
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s.rfind("sybilgat-l", 0) == 0) {
      a.name = "sybilgat";
      try {
        a.gat_layers = std::stoi(s.substr(10));
      } catch (const std::exception&) {
        throw InvalidArgument("bad GAT depth in \"" + s + "\"");
      }
    } else {
      a.name = s;
    }
  } else {
    a.name = j.at("name").get<std::string>();
    a.gat_layers = j.value("layers", 2);
  }
  return a;
}

DatasetSource parse_source(const json& j, const std::filesystem::path& data_dir) {
  DatasetSource s;
  s.edges = j.at("edges").get<std::string>();
  s.labels = j.at("labels").get<std::string>();
  std::string dir = j.value("direction", "union");
  if (dir == "mutual") s.direction = Direction::Mutual;
  else if (dir != "union") throw InvalidArgument("direction must be \"union\" or \"mutual\"");
  s.honest_known_fraction = j.value("honest_known_fraction", s.honest_known_fraction);
  s.sybil_known_fraction = j.value("sybil_known_fraction", s.sybil_known_fraction);
  for (std::string* p : {&s.edges, &s.labels}) {
    if (std::filesystem::path(*p).is_relative()) *p = (data_dir / *p).string();
  }
  return s;
}

ExperimentCase parse_case(const json& j, const std::filesystem::path& data_dir) {
  ExperimentCase c;
  c.dataset = j.value("dataset", std::string{"synthetic"});
  c.model = j.value("model", std::string{});
  if (j.contains("network")) {
    c.network = synth_from_json(j.at("network"));
    resolve_region_paths(c.network, data_dir);
  }
  if (j.contains("source")) {
    c.source = parse_source(j.at("source"), data_dir);
    if (j.contains("attack")) throw InvalidArgument("a dataset source carries its own edges; drop \"attack\"");
  } else if (!j.contains("network")) {
    throw InvalidArgument("case \"" + c.model + "\" needs \"network\" or \"source\"");
  }
  c.sample_fraction = j.value("sample_fraction", c.sample_fraction);
  c.burn_probability = j.value("burn_probability", c.burn_probability);
  c.pretrain_known_fraction = j.value("pretrain_known_fraction", c.pretrain_known_fraction);
  if (j.contains("pretrain")) {
    c.pretrain = synth_from_json(j.at("pretrain"));
    resolve_region_paths(*c.pretrain, data_dir);
  }
  if (j.contains("pretrain_attack")) c.pretrain_attack = attack_from_json(j.at("pretrain_attack"));
  if (j.contains("attack_counts")) c.attack_counts = j.at("attack_counts").get<std::vector<double>>();
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (experiment < 1 || experiment > 4) throw InvalidArgument("experiment must be 1, 2, 3 or 4");
  if (seeds.empty()) throw InvalidArgument("seed list is empty");
  if (algorithms.empty()) throw InvalidArgument("algorithm list is empty");
  if (cases.empty()) throw InvalidArgument("case list is empty");
  for (const auto& a : algorithms) {
    if (std::find(std::begin(kDetectors), std::end(kDetectors), a.name) == std::end(kDetectors)) {
      throw InvalidArgument("unknown algorithm \"" + a.name + "\"");
    }
    if (a.name == "sybilgat" && a.gat_layers < 1) throw InvalidArgument("GAT depth must be >= 1");
  }
  for (const auto& c : cases) {
    if (experiment == 1 && !(c.sample_fraction > 0.0 && c.sample_fraction < 1.0)) {
      throw InvalidArgument("sample_fraction must lie in (0, 1)");
    }
    if (experiment == 2 && !c.pretrain) throw InvalidArgument("experiment 2 case \"" + c.model + "\" needs \"pretrain\"");
    if (experiment == 3 && !c.pretrain_attack) {
      throw InvalidArgument("experiment 3 case \"" + c.model + "\" needs \"pretrain_attack\"");
    }
    if (c.source && experiment != 1 && experiment != 4) {
      throw InvalidArgument("dataset sources are supported in experiments 1 and 4 only");
    }
    for (double k : c.attack_counts) {
      if (!(k >= 0.0)) throw InvalidArgument("attack counts must be >= 0");
    }
  }
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& data_dir) {
  ExperimentConfig cfg;
  cfg.experiment = j.at("experiment").get<int>();
  cfg.name = j.value("name", "exp" + std::to_string(cfg.experiment));
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& a : j.at("algorithms")) cfg.algorithms.push_back(parse_algorithm(a));
  if (j.contains("gat")) cfg.gat = hyper_from_json(j.at("gat"));
  for (const auto& c : j.at("cases")) cfg.cases.push_back(parse_case(c, data_dir));
  cfg.large = j.value("large", false);
  cfg.output = j.value("output", std::string{});
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  json j = read_json_file(path);
  std::filesystem::path data_dir;
  if (const char* env = std::getenv("SYBILLAB_DATA_DIR"); env && *env) {
    data_dir = env;
  } else {
    data_dir = std::filesystem::absolute(path).parent_path() / ".." / ".." / "data";
  }
  try {
    return experiment_config_from_json(j, data_dir.lexically_normal());
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

DetectorRun run_detector(const AlgorithmSpec& algo, const Graph& g, const TrainSplit& split, const GatHyper& gat,
                         std::uint64_t seed, const GatModel* pretrained, unsigned threads) {
  DetectorRun run;
  if (algo.name == "sybilrank") {
    RankParams p;
    p.threads = threads;
    run.scores = sybilrank(g, split.known_honest, p);
  } else if (algo.name == "sybilbelief") {
    run.scores = sybilbelief(g, split);
  } else if (algo.name == "sybilscar-c" || algo.name == "sybilscar-d") {
    ScarParams p;
    p.variant = algo.name == "sybilscar-c" ? ScarVariant::Constant : ScarVariant::Degree;
    p.threads = threads;
    run.scores = sybilscar(g, split, p);
  } else if (algo.name == "sybilgat") {
    GatModel trained;
    const GatModel* model = pretrained;
    if (!model) {
      GatHyper h = gat;
      h.layers = algo.gat_layers;
      h.seed = Rng::derive_seed(seed, algo.label());
      TrainedModel t = train_gat(g, split, h);
      run.train_epochs = t.report.epochs_run;
      trained = std::move(t.model);
      model = &trained;
    }
    Prediction pred = predict(*model, g, split, Rng::derive_seed(seed, "predict"));
    run.threshold = pred.threshold;
    run.scores = std::move(pred.scores);
  } else {
    throw InvalidArgument("unknown algorithm \"" + algo.name + "\"");
  }
  return run;
}

namespace {

struct WorkItem {
  std::size_t case_index;
  double attack_count;
  std::uint64_t seed;
};

LabeledNetwork build_from_source(const DatasetSource& src, std::uint64_t seed) {
  LoadedGraph loaded = load_edge_list(src.edges, src.direction);
  LabelLoadResult labels = load_labels(src.labels, loaded.ids);
  LabeledNetwork net;
  net.graph = std::move(loaded.graph);
  net.regions = std::move(labels.labels);
  Rng rng = Rng::derive(seed, "split");
  net.split = sample_train_split(net.regions, src.honest_known_fraction, src.sybil_known_fraction, rng);
  return net;
}

LabeledNetwork build_network(const ExperimentCase& c, double attack_count, std::uint64_t seed) {
  if (c.source) return build_from_source(*c.source, seed);
  SynthSpec spec = c.network;
  spec.seed = seed;
  spec.attack.edges_per_sybil = attack_count;
  return synthesize_network(spec);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

struct PretrainResult {
  std::map<int, GatModel> by_depth;
  std::map<int, int> epochs;
  std::map<int, double> train_ms;
};

// Trains one model per requested GAT depth on (g, split).
PretrainResult pretrain_all(const ExperimentConfig& cfg, const Graph& g, const TrainSplit& split, std::uint64_t seed) {
  PretrainResult out;
  for (const auto& a : cfg.algorithms) {
    if (a.name != "sybilgat" || out.by_depth.count(a.gat_layers)) continue;
    const auto start = std::chrono::steady_clock::now();
    GatHyper h = cfg.gat;
    h.layers = a.gat_layers;
    h.seed = Rng::derive_seed(seed, a.label());
    TrainedModel t = train_gat(g, split, h);
    out.epochs[a.gat_layers] = t.report.epochs_run;
    out.train_ms[a.gat_layers] = elapsed_ms(start);
    out.by_depth.emplace(a.gat_layers, std::move(t.model));
  }
  return out;
}

std::vector<RunRecord> run_item(const ExperimentConfig& cfg, const WorkItem& item, const RunOptions& options) {
  const ExperimentCase& c = cfg.cases[item.case_index];

  Graph eval_graph;
  RegionLabels eval_regions;
  TrainSplit eval_split;
  PretrainResult pretrained;
  double p_targeted = c.source ? 0.0 : c.network.attack.p_targeted;

  switch (cfg.experiment) {
    case 1: {
      LabeledNetwork net = build_network(c, item.attack_count, item.seed);
      Rng sample_rng = Rng::derive(item.seed, "sampling");
      SampleResult sample = forest_fire_sample(net.graph, c.sample_fraction, c.burn_probability, sample_rng);
      RegionLabels sub_regions = restrict_labels(net.regions, sample.node_map);
      if (sub_regions.honest_count() < 2 || sub_regions.sybil_count() < 2) {
        throw RuntimeFailure("sampled subgraph holds fewer than 2 nodes of a class (seed " +
                             std::to_string(item.seed) + ")");
      }
      Rng split_rng = Rng::derive(item.seed, "pretrain-split");
      TrainSplit sub_split = sample_train_split(sub_regions, c.pretrain_known_fraction, split_rng);
      pretrained = pretrain_all(cfg, sample.subgraph, sub_split, item.seed);
      ResidualGraph residual = residual_graph(net.graph, net.regions, sample.node_map);
      eval_split = restrict_split(net.split, residual.node_map, net.graph.node_count());
      eval_graph = std::move(residual.graph);
      eval_regions = std::move(residual.regions);
      break;
    }
    case 2: {
      SynthSpec small = *c.pretrain;
      small.seed = Rng::derive_seed(item.seed, "pretrain-network");
      small.attack.edges_per_sybil = c.attack_counts.empty() ? small.attack.edges_per_sybil : item.attack_count;
      LabeledNetwork pre = synthesize_network(small);
      pretrained = pretrain_all(cfg, pre.graph, pre.split, item.seed);
      LabeledNetwork net = build_network(c, item.attack_count, item.seed);
      eval_graph = std::move(net.graph);
      eval_regions = std::move(net.regions);
      eval_split = std::move(net.split);
      break;
    }
    case 3: {
      SynthSpec base_spec = c.network;
      base_spec.seed = item.seed;
      base_spec.attack = *c.pretrain_attack;
      LabeledNetwork base = synthesize_network(base_spec);
      pretrained = pretrain_all(cfg, base.graph, base.split, item.seed);
      AttackConfig attack = c.network.attack;
      attack.edges_per_sybil = item.attack_count;
      LabeledNetwork net = reattack_network(base, attack, Rng::derive_seed(item.seed, "reattack"));
      eval_graph = std::move(net.graph);
      eval_regions = std::move(net.regions);
      eval_split = std::move(net.split);
      break;
    }
    default: {
      LabeledNetwork net = build_network(c, item.attack_count, item.seed);
      eval_graph = std::move(net.graph);
      eval_regions = std::move(net.regions);
      eval_split = std::move(net.split);
    }
  }

  eval_split.validate(eval_regions);
  const std::vector<NodeId> test = eval_split.test_nodes(eval_graph.node_count());
  std::vector<RunRecord> out;
  for (const auto& algo : cfg.algorithms) {
    const auto start = std::chrono::steady_clock::now();
    const GatModel* model = nullptr;
    int epochs = 0;
    double pretrain_ms = 0.0;
    if (algo.name == "sybilgat" && cfg.experiment != 4) {
      model = &pretrained.by_depth.at(algo.gat_layers);
      epochs = pretrained.epochs.at(algo.gat_layers);
      pretrain_ms = pretrained.train_ms.at(algo.gat_layers);
    }
    DetectorRun run =
        run_detector(algo, eval_graph, eval_split, cfg.gat, item.seed, model, options.detector_threads);
    RunRecord r;
    r.experiment = "exp" + std::to_string(cfg.experiment);
    r.dataset = c.dataset;
    r.model = c.model;
    r.algorithm = algo.label();
    r.seed = item.seed;
    r.attack_edges_per_sybil = c.source ? 0.0 : item.attack_count;
    r.p_targeted = p_targeted;
    r.auc = auc_on(run.scores, eval_regions, test);
    r.threshold = run.threshold;
    r.train_epochs = model ? epochs : run.train_epochs;
    if (options.record_timing) r.wall_ms = elapsed_ms(start) + pretrain_ms;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  if (cfg.large && !options.allow_large) {
    throw InvalidArgument("config \"" + cfg.name + "\" is marked large; pass --allow-large to run it");
  }
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (options.seed) seeds = {*options.seed};

  std::vector<WorkItem> items;
  for (std::size_t ci = 0; ci < cfg.cases.size(); ++ci) {
    const auto& c = cfg.cases[ci];
    std::vector<double> counts = c.attack_counts;
    if (counts.empty()) counts.push_back(c.source ? 0.0 : c.network.attack.edges_per_sybil);
    for (double k : counts) {
      for (std::uint64_t s : seeds) items.push_back({ci, k, s});
    }
  }

  std::vector<std::vector<RunRecord>> results(items.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        results[i] = run_item(cfg, items[i], options);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(items.size());
        return;
      }
    }
  };
  const unsigned workers = std::clamp<unsigned>(options.workers, 1, static_cast<unsigned>(std::max<std::size_t>(1, items.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> records;
  for (auto& r : results) records.insert(records.end(), r.begin(), r.end());
  return records;
}

std::vector<CellSummary> aggregate(const std::vector<RunRecord>& records) {
  std::map<CellKey, std::vector<double>> groups;
  for (const auto& r : records) {
    groups[{r.experiment, r.dataset, r.model, r.algorithm, r.attack_edges_per_sybil, r.p_targeted}].push_back(r.auc);
  }
  std::vector<CellSummary> out;
  for (const auto& [key, values] : groups) {
    CellSummary s;
    s.key = key;
    s.runs = values.size();
    s.mean_auc = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean_auc) * (v - s.mean_auc);
      s.std_auc = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PlotSeries> plot_series(const std::vector<RunRecord>& records) {
  std::map<std::tuple<std::string, std::string, std::string, std::string, double>, PlotSeries> curves;
  for (const auto& cell : aggregate(records)) {
    const auto& k = cell.key;
    auto& s = curves[{k.experiment, k.dataset, k.model, k.algorithm, k.p_targeted}];
    if (s.points.empty()) s = {k.experiment, k.dataset, k.model, k.algorithm, k.p_targeted, {}};
    s.points.push_back({k.attack_edges_per_sybil, cell.mean_auc, cell.std_auc});
  }
  std::vector<PlotSeries> out;
  for (auto& [key, s] : curves) {
    std::sort(s.points.begin(), s.points.end(), [](const PlotPoint& a, const PlotPoint& b) { return a.x < b.x; });
    out.push_back(std::move(s));
  }
  return out;
}

void write_plot_series(const std::vector<PlotSeries>& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "experiment,dataset,model,algorithm,p_targeted,x,mean_auc,std_auc\n";
  char buf[128];
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      std::snprintf(buf, sizeof buf, ",%g,%g,%.6f,%.6f\n", s.p_targeted, p.x, p.mean, p.std);
      out << s.experiment << ',' << s.dataset << ',' << s.model << ',' << s.algorithm << buf;
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void canonical_sort(std::vector<RunRecord>& records) {
  auto key = [](const RunRecord& r) {
    return std::tie(r.experiment, r.dataset, r.model, r.algorithm, r.attack_edges_per_sybil, r.p_targeted, r.seed);
  };
  std::stable_sort(records.begin(), records.end(),
                   [&](const RunRecord& a, const RunRecord& b) { return key(a) < key(b); });
}

namespace {

std::vector<double> midranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return rank;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("spearman needs two equal-length series of >= 2");
  auto rx = midranks(x), ry = midranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace sybillab
