// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "sybillab/sybillab.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("sybillab-capi-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSpec = R"({
  "honest": {"model": "pl", "n": 300, "m": 4, "p": 0.8},
  "sybil": {"model": "pl", "n": 300, "m": 4, "p": 0.8},
  "attack": {"edges_per_sybil": 2},
  "train_fraction": 0.05,
  "seed": 5
})";

struct Net {
  sl_network* net = nullptr;
  sl_graph* graph = nullptr;
  sl_split* split = nullptr;
  sl_labels* labels = nullptr;
  Net() {
    REQUIRE(sl_network_synthesize(kSpec, nullptr, nullptr, &net) == SL_OK);
    REQUIRE(sl_network_graph(net, &graph) == SL_OK);
    REQUIRE(sl_network_split(net, &split) == SL_OK);
    REQUIRE(sl_network_labels(net, &labels) == SL_OK);
  }
  ~Net() {
    sl_labels_free(labels);
    sl_split_free(split);
    sl_graph_free(graph);
    sl_network_free(net);
  }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(sl_version()) > 0);
  CHECK(std::string(sl_status_name(SL_IO_ERROR)) == "i/o error");
  sl_graph_free(nullptr);
  sl_scores_free(nullptr);
  sl_string_free(nullptr);
}

TEST_CASE("errors map to status codes with a message") {
  sl_graph* g = nullptr;
  CHECK(sl_graph_load("/nonexistent/graph.txt", &g) == SL_IO_ERROR);
  CHECK(g == nullptr);
  CHECK(std::string(sl_last_error()).find("graph.txt") != std::string::npos);

  sl_network* net = nullptr;
  CHECK(sl_network_synthesize("{not json", nullptr, nullptr, &net) == SL_INVALID_ARGUMENT);
  CHECK(sl_network_synthesize(R"({"honest": {"model": "ba", "n": 3, "m": 5}})", nullptr, nullptr, &net) ==
        SL_INVALID_ARGUMENT);
  CHECK(sl_graph_load(nullptr, &g) == SL_INVALID_ARGUMENT);
}

TEST_CASE("synthesized network info") {
  Net n;
  sl_network_info info{};
  sl_network_get_info(n.net, &info);
  CHECK(info.nodes == 600);
  CHECK(info.honest == 300);
  CHECK(info.sybil == 300);
  CHECK(info.attack_edges == 600);
  CHECK(info.known_honest == 15);
  CHECK(info.known_sybil == 15);
  CHECK(sl_graph_node_count(n.graph) == 600);
  CHECK(sl_split_known_honest(n.split) == 15);

  uint64_t other = 6;
  sl_network* b = nullptr;
  REQUIRE(sl_network_synthesize(kSpec, &other, nullptr, &b) == SL_OK);
  sl_network_info ib{};
  sl_network_get_info(b, &ib);
  CHECK(ib.nodes == 600);
  sl_network_free(b);
}

TEST_CASE("network save and load") {
  Net n;
  auto dir = scratch("network");
  REQUIRE(sl_network_save(n.net, dir.c_str()) == SL_OK);
  for (const char* f : {"graph.txt", "labels.txt", "split.txt", "attack_edges.txt", "spec.json"}) {
    CHECK(fs::exists(dir / f));
  }
  sl_network* back = nullptr;
  REQUIRE(sl_network_load(dir.c_str(), &back) == SL_OK);
  sl_network_info a{}, b{};
  sl_network_get_info(n.net, &a);
  sl_network_get_info(back, &b);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
  sl_network_free(back);
}

TEST_CASE("detect and evaluate") {
  Net n;
  sl_scores* scores = nullptr;
  REQUIRE(sl_detect("sybilscar-d", n.graph, n.split, 2, &scores) == SL_OK);
  CHECK(sl_scores_size(scores) == 600);
  CHECK(std::string(sl_scores_detector(scores)) == "sybilscar-d");
  sl_eval_result r{};
  REQUIRE(sl_evaluate(scores, n.labels, n.split, 0.5, &r) == SL_OK);
  CHECK(r.evaluated == 570);
  CHECK(r.auc > 0.8);
  CHECK(sl_detect("sybilgat", n.graph, n.split, 1, &scores) == SL_INVALID_ARGUMENT);
  CHECK(sl_detect("nope", n.graph, n.split, 1, &scores) == SL_INVALID_ARGUMENT);

  auto dir = scratch("scores");
  REQUIRE(sl_scores_save(scores, (dir / "s.csv").c_str(), 0, 0.0) == SL_OK);
  sl_scores* back = nullptr;
  REQUIRE(sl_scores_load((dir / "s.csv").c_str(), &back) == SL_OK);
  CHECK(sl_scores_size(back) == 600);
  for (size_t i = 0; i < 600; ++i) CHECK(std::abs(sl_scores_data(back)[i] - sl_scores_data(scores)[i]) < 1e-5);
  sl_scores_free(back);
  sl_scores_free(scores);
}

TEST_CASE("train, save, load, predict") {
  Net n;
  sl_model* model = nullptr;
  REQUIRE(sl_train(n.graph, n.split, R"({"max_epochs": 20})", nullptr, &model) == SL_OK);
  char* report = sl_model_report_json(model);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("validation_loss") != std::string::npos);
  sl_string_free(report);

  auto dir = scratch("model");
  auto path = (dir / "m.json").string();
  REQUIRE(sl_model_save(model, path.c_str()) == SL_OK);
  sl_model* loaded = nullptr;
  REQUIRE(sl_model_load(path.c_str(), &loaded) == SL_OK);
  CHECK(sl_model_report_json(loaded) == nullptr);
  CHECK(sl_model_threshold(loaded) == sl_model_threshold(model));

  sl_scores* a = nullptr;
  sl_scores* b = nullptr;
  REQUIRE(sl_predict_scores(model, n.graph, n.split, &a) == SL_OK);
  REQUIRE(sl_predict_scores(loaded, n.graph, n.split, &b) == SL_OK);
  CHECK(std::memcmp(sl_scores_data(a), sl_scores_data(b), 600 * sizeof(double)) == 0);

  sl_scores* p = nullptr;
  double threshold = -1;
  REQUIRE(sl_predict(loaded, n.graph, n.split, 1, &p, &threshold) == SL_OK);
  CHECK(threshold > 0.0);
  CHECK(threshold < 1.0);
  CHECK(sl_train(n.graph, n.split, R"({"layers": 0})", nullptr, &model) == SL_INVALID_ARGUMENT);

  sl_scores_free(p);
  sl_scores_free(a);
  sl_scores_free(b);
  sl_model_free(loaded);
  sl_model_free(model);
}

TEST_CASE("forest-fire sample through the C API") {
  Net n;
  sl_sample* s = nullptr;
  REQUIRE(sl_sample_forest_fire(n.graph, 0.1, 0.4, 9, &s) == SL_OK);
  const uint32_t* map = nullptr;
  size_t count = 0;
  sl_sample_node_map(s, &map, &count);
  CHECK(count == 60);
  sl_graph* sub = nullptr;
  REQUIRE(sl_sample_subgraph(s, &sub) == SL_OK);
  CHECK(sl_graph_node_count(sub) == 60);
  sl_labels* sl = nullptr;
  REQUIRE(sl_sample_labels(s, n.labels, &sl) == SL_OK);
  sl_labels_free(sl);
  sl_graph_free(sub);
  sl_sample_free(s);
  CHECK(sl_sample_forest_fire(n.graph, 0.0, 0.4, 9, &s) == SL_INVALID_ARGUMENT);
}

TEST_CASE("records save, load, summary") {
  auto dir = scratch("records");
  auto cfg = dir / "c.json";
  std::ofstream(cfg) << R"({
    "experiment": 4, "name": "capi", "seeds": [1],
    "algorithms": ["sybilrank"],
    "cases": [{"dataset": "d", "model": "BA-BA",
               "network": {"honest": {"model": "ba", "n": 100, "m": 3},
                           "sybil": {"model": "ba", "n": 100, "m": 3},
                           "attack": {"edges_per_sybil": 1}},
               "attack_counts": [1, 2]}]
  })";
  sl_experiment* exp = nullptr;
  REQUIRE(sl_experiment_load(cfg.c_str(), &exp) == SL_OK);
  CHECK(std::string(sl_experiment_name(exp)) == "capi");
  CHECK(std::string(sl_experiment_output(exp)).empty());
  sl_run_options opt{2, 0, 0, 0, 0};
  sl_records* recs = nullptr;
  REQUIRE(sl_experiment_run(exp, &opt, &recs) == SL_OK);
  CHECK(sl_records_count(recs) == 2);
  auto out = (dir / "r.json").string();
  REQUIRE(sl_records_save(recs, out.c_str()) == SL_OK);
  sl_records* back = nullptr;
  REQUIRE(sl_records_load(out.c_str(), &back) == SL_OK);
  CHECK(sl_records_count(back) == 2);
  char* summary = sl_records_summary(back);
  REQUIRE(summary != nullptr);
  CHECK(std::string(summary).find("sybilrank") != std::string::npos);
  sl_string_free(summary);
  REQUIRE(sl_records_save_plot_data(back, (dir / "p.csv").c_str()) == SL_OK);
  sl_records_free(back);
  sl_records_free(recs);
  sl_experiment_free(exp);

  CHECK(sl_experiment_load((dir / "none.json").c_str(), &exp) != SL_OK);
}
