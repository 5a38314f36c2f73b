#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "sybillab/error.hpp"
#include "sybillab/eval.hpp"
#include "sybillab/gat.hpp"
#include "sybillab/synthesis.hpp"

using namespace sybillab;

namespace {

GatHyper tiny_hyper(int layers = 2, int input = 1, int output = 1) {
  GatHyper h;
  h.layers = layers;
  h.input_width = input;
  h.output_width = output;
  h.hidden_width = 3;
  h.heads = 2;
  return h;
}

// Two 8-cliques joined by a single bridge 7-8.
Graph two_cliques() {
  std::vector<Edge> e;
  for (NodeId i = 0; i < 8; ++i)
    for (NodeId j = i + 1; j < 8; ++j) {
      e.emplace_back(i, j);
      e.emplace_back(i + 8, j + 8);
    }
  e.emplace_back(7, 8);
  return Graph::from_edges(16, e);
}

std::vector<Label> clique_labels() {
  std::vector<Label> l(16, Label::Honest);
  for (std::size_t i = 8; i < 16; ++i) l[i] = Label::Sybil;
  return l;
}

// Moves every parameter off zero so no LeakyReLU input sits on its kink
// (zero bias plus zero input gives a logit of exactly 0).
void jitter(GatModel& model, Rng& rng) {
  for (double& p : model.parameters()) p += 0.1 * (rng.uniform01() - 0.5);
}

// Compares the analytic gradient with central differences on every parameter.
void check_gradient(const GatHyper& hyper, std::uint64_t seed) {
  Rng rng(seed);
  Graph g = testing::random_graph(9, 0.35, rng);
  GatModel model = GatModel::initialize(hyper, rng);
  jitter(model, rng);
  TrainSplit known{{0, 2}, {5, 7}};
  Matrix x = node_features(9, known, hyper.input_width);
  AttentionGraph ag(g);
  std::vector<NodeId> nodes{0, 1, 3, 5, 8};
  std::vector<Label> targets{Label::Honest, Label::Honest, Label::Sybil, Label::Sybil, Label::Sybil};

  std::vector<double> grad;
  loss_and_gradient(model, ag, x, nodes, targets, {}, grad);
  REQUIRE(grad.size() == model.parameters().size());

  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double keep = model.parameters()[i];
    model.parameters()[i] = keep + h;
    double up = classification_loss(gat_forward_logits(model, ag, x, {}), nodes, targets);
    model.parameters()[i] = keep - h;
    double down = classification_loss(gat_forward_logits(model, ag, x, {}), nodes, targets);
    model.parameters()[i] = keep;
    double numeric = (up - down) / (2 * h);
    double scale = std::max({1.0, std::abs(numeric), std::abs(grad[i])});
    worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
  }
  CHECK(worst < 1e-6);
}

}  // namespace

TEST_CASE("feature encoding") {
  TrainSplit known{{0}, {2}};
  Matrix one = node_features(3, known, 1);
  CHECK(one(0, 0) == 0.0);
  CHECK(one(1, 0) == 0.5);
  CHECK(one(2, 0) == 1.0);
  Matrix two = node_features(3, known, 2);
  CHECK(two(0, 0) == 1.0);
  CHECK(two(0, 1) == 0.0);
  CHECK(two(1, 0) == 0.5);
  CHECK(two(1, 1) == 0.5);
  CHECK(two(2, 0) == 0.0);
  CHECK(two(2, 1) == 1.0);
}

TEST_CASE("architecture shapes") {
  GatHyper h;
  h.layers = 4;
  auto shapes = GatModel::architecture(h);
  REQUIRE(shapes.size() == 4);
  CHECK(shapes[0].in_dim == 1);
  CHECK(shapes[0].out_dim == 4);
  CHECK(shapes[0].heads == 4);
  CHECK(shapes[1].in_dim == 16);
  CHECK(shapes[2].in_dim == 16);
  CHECK(shapes[3].in_dim == 16);
  CHECK(shapes[3].out_dim == 1);
  CHECK(shapes[3].heads == 1);
  h.layers = 1;
  auto single = GatModel::architecture(h);
  REQUIRE(single.size() == 1);
  CHECK(single[0].in_dim == 1);
  CHECK(single[0].out_dim == 1);
  std::size_t total = 0;
  for (const auto& s : shapes) total += s.parameter_count();
  Rng rng(1);
  h.layers = 4;
  CHECK(GatModel::initialize(h, rng).parameters().size() == total);
}

TEST_CASE("from_parameters checks the length") {
  GatHyper h = tiny_hyper();
  auto zeros = GatModel::zeros(h);
  std::vector<double> p(zeros.parameters().begin(), zeros.parameters().end());
  CHECK(GatModel::from_parameters(h, p) == zeros);
  p.pop_back();
  CHECK_THROWS_AS(GatModel::from_parameters(h, p), InvalidArgument);
}

TEST_CASE("attention neighborhoods include self loops") {
  Graph g = Graph::from_edges(4, std::vector<Edge>{{1, 3}, {0, 3}});
  AttentionGraph ag(g);
  CHECK(ag.entry_count() == 4 + 4);
  CHECK(ag.end(2) - ag.begin(2) == 1);
  CHECK(ag.source(ag.begin(2)) == 2);
  std::vector<NodeId> n3;
  for (std::size_t e = ag.begin(3); e < ag.end(3); ++e) n3.push_back(ag.source(e));
  CHECK(n3 == std::vector<NodeId>{0, 1, 3});
}

TEST_CASE("attention coefficients sum to one") {
  Rng rng(2);
  Graph g = testing::random_graph(30, 0.15, rng);
  GatHyper h = tiny_hyper(3);
  GatModel model = GatModel::initialize(h, rng);
  AttentionGraph ag(g);
  Matrix x = node_features(30, TrainSplit{{0}, {1}}, 1);
  std::vector<LayerCache> caches;
  gat_forward_logits(model, ag, x, {}, &caches);
  REQUIRE(caches.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    std::size_t heads = model.layers()[l].heads;
    for (NodeId i = 0; i < 30; ++i) {
      for (std::size_t hd = 0; hd < heads; ++hd) {
        double sum = 0.0;
        for (std::size_t e = ag.begin(i); e < ag.end(i); ++e) sum += caches[l].alpha[e * heads + hd];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("isolated node attends only to itself") {
  Graph g = Graph::from_edges(3, std::vector<Edge>{{0, 1}});
  Rng rng(3);
  GatModel model = GatModel::initialize(tiny_hyper(1), rng);
  AttentionGraph ag(g);
  Matrix x = node_features(3, TrainSplit{{0}, {1}}, 1);
  std::vector<LayerCache> caches;
  gat_forward_logits(model, ag, x, {}, &caches);
  CHECK(caches[0].alpha[ag.begin(2)] == doctest::Approx(1.0));
}

TEST_CASE("single layer with zero weights outputs 0.5") {
  GatHyper h = tiny_hyper(1);
  GatModel model = GatModel::zeros(h);
  Graph g = testing::cycle_graph(5);
  auto s = predict_scores(model, g, TrainSplit{{0}, {1}});
  for (double v : s.values) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("gradient matches finite differences") {
  SUBCASE("sigmoid, one channel") { check_gradient(tiny_hyper(2), 4); }
  SUBCASE("softmax, two channels") { check_gradient(tiny_hyper(2, 2, 2), 5); }
  SUBCASE("three layers") { check_gradient(tiny_hyper(3), 6); }
  SUBCASE("single layer") { check_gradient(tiny_hyper(1), 7); }
}

TEST_CASE("gradient with dropout matches finite differences under a fixed mask") {
  GatHyper h = tiny_hyper(2);
  Rng rng(8);
  Graph g = testing::random_graph(9, 0.35, rng);
  GatModel model = GatModel::initialize(h, rng);
  jitter(model, rng);
  Matrix x = node_features(9, TrainSplit{{0}, {5}}, 1);
  AttentionGraph ag(g);
  std::vector<NodeId> nodes{0, 5, 6};
  std::vector<Label> targets{Label::Honest, Label::Sybil, Label::Sybil};
  std::vector<double> grad;
  Rng drop(9);
  loss_and_gradient(model, ag, x, nodes, targets, {true, &drop}, grad);
  auto loss_at = [&] {
    Rng same(9);
    std::vector<double> unused;
    return loss_and_gradient(model, ag, x, nodes, targets, {true, &same}, unused);
  };
  const double step = 1e-6;
  for (std::size_t i = 0; i < grad.size(); i += 3) {
    double keep = model.parameters()[i];
    model.parameters()[i] = keep + step;
    double up = loss_at();
    model.parameters()[i] = keep - step;
    double down = loss_at();
    model.parameters()[i] = keep;
    CHECK((up - down) / (2 * step) == doctest::Approx(grad[i]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("loss values") {
  Matrix logits(2, 1, 0.0);
  std::vector<NodeId> nodes{0, 1};
  std::vector<Label> targets{Label::Honest, Label::Sybil};
  CHECK(classification_loss(logits, nodes, targets) == doctest::Approx(std::log(2.0)));
  Matrix two(2, 2, 0.0);
  CHECK(classification_loss(two, nodes, targets) == doctest::Approx(std::log(2.0)));
  Matrix big(1, 1, 800.0);
  double l = classification_loss(big, std::vector<NodeId>{0}, std::vector<Label>{Label::Honest});
  CHECK(std::isfinite(l));
  CHECK(l == doctest::Approx(800.0));
}

TEST_CASE("early stopping patience") {
  EarlyStopping stop(3);
  CHECK(stop.update(1, 1.0));
  CHECK_FALSE(stop.update(2, 1.1));
  CHECK_FALSE(stop.should_stop());
  CHECK_FALSE(stop.update(3, 1.2));
  CHECK_FALSE(stop.update(4, 1.3));
  CHECK(stop.should_stop());
  CHECK(stop.best_epoch() == 1);
  CHECK(stop.best_loss() == 1.0);
}

TEST_CASE("adam first step moves by the learning rate") {
  AdamOptimizer adam(2, 0.01, 0.9, 0.999, 1e-8);
  std::vector<double> p{1.0, -1.0};
  std::vector<double> g{0.5, -3.0};
  adam.step(p, g);
  CHECK(p[0] == doctest::Approx(0.99).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-0.99).epsilon(1e-6));
}

TEST_CASE("stratified split keeps both classes on both sides") {
  TrainSplit known{{0, 1, 2, 3, 4}, {10, 11}};
  Rng rng(1);
  auto [a, b] = stratified_split(known, 0.8, rng);
  CHECK(a.known_honest.size() == 4);
  CHECK(b.known_honest.size() == 1);
  CHECK(a.known_sybil.size() == 1);
  CHECK(b.known_sybil.size() == 1);
}

TEST_CASE("training separates two cliques") {
  Graph g = two_cliques();
  TrainSplit split{{0, 1, 2, 3, 4}, {11, 12, 13, 14, 15}};
  GatHyper h;
  h.max_epochs = 200;
  auto trained = train_gat(g, split, h);
  auto s = predict_scores(trained.model, g, split);
  auto labels = clique_labels();
  CHECK(auc(s.values, labels) == doctest::Approx(1.0));
  CHECK(trained.report.best_epoch >= 1);
  CHECK(trained.report.threshold > 0.0);
  CHECK(trained.report.threshold < 1.0);
}

TEST_CASE("training loss drops early on") {
  Graph g = two_cliques();
  TrainSplit split{{0, 1, 2, 3, 4}, {11, 12, 13, 14, 15}};
  GatHyper h;
  h.dropout = 0.0;
  h.max_epochs = 5;
  h.patience = 100;
  auto r = train_gat(g, split, h).report;
  REQUIRE(r.train_loss.size() == 5);
  double prev = r.initial_train_loss;
  for (double l : r.train_loss) {
    CHECK(l <= prev + 1e-12);
    prev = l;
  }
}

TEST_CASE("training is deterministic per seed") {
  Graph g = two_cliques();
  TrainSplit split{{0, 1, 2, 3}, {12, 13, 14, 15}};
  GatHyper h;
  h.max_epochs = 30;
  auto a = train_gat(g, split, h);
  auto b = train_gat(g, split, h);
  CHECK(a.model == b.model);
  CHECK(a.report.validation_loss == b.report.validation_loss);
  h.seed = 7;
  auto c = train_gat(g, split, h);
  CHECK_FALSE(a.model == c.model);
}

TEST_CASE("training requires two known nodes per class") {
  Graph g = two_cliques();
  CHECK_THROWS_AS(train_gat(g, TrainSplit{{0}, {12, 13}}, GatHyper{}), InvalidArgument);
}

TEST_CASE("hyper validation") {
  GatHyper h;
  h.layers = 0;
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
  h = GatHyper{};
  h.input_width = 3;
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
  h = GatHyper{};
  h.dropout = 1.0;
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
}

TEST_CASE("threshold examples") {
  std::vector<double> s{0.1, 0.2, 0.8, 0.9};
  std::vector<Label> l{Label::Honest, Label::Honest, Label::Sybil, Label::Sybil};
  CHECK(estimate_threshold(s, l) == doctest::Approx(0.5));
  // Perfectly separable off-center: the cut lies between the classes.
  std::vector<double> low{0.01, 0.02, 0.05, 0.06};
  CHECK(estimate_threshold(low, l) == doctest::Approx(0.035));
  // One class missing falls back to 0.5.
  std::vector<Label> one(4, Label::Sybil);
  CHECK(estimate_threshold(s, one) == 0.5);
  // Cuts 0.2 and 0.8 tie on J and on distance to 0.5; the smaller wins.
  std::vector<double> wide{0.1, 0.3, 0.7, 0.9};
  std::vector<Label> mixed{Label::Honest, Label::Sybil, Label::Honest, Label::Sybil};
  CHECK(estimate_threshold(wide, mixed) == doctest::Approx(0.2));
  // Equal J, but 0.45 sits closer to 0.5 than 0.15.
  std::vector<double> near{0.1, 0.2, 0.4, 0.5};
  std::vector<Label> alt{Label::Honest, Label::Sybil, Label::Honest, Label::Sybil};
  CHECK(estimate_threshold(near, alt) == doctest::Approx(0.45));
}

TEST_CASE("threshold matches a brute-force search") {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = 4 + rng.uniform_index(20);
    std::vector<double> s(n);
    std::vector<Label> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::round(rng.uniform01() * 20) / 20;
      l[i] = rng.bernoulli(0.5) ? Label::Sybil : Label::Honest;
    }
    l[0] = Label::Honest;
    l[1] = Label::Sybil;
    double t = estimate_threshold(s, l);
    auto youden = [&](double cut) {
      auto c = confusion_at(s, l, cut);
      double pos = static_cast<double>(c.true_positive + c.false_negative);
      double neg = static_cast<double>(c.false_positive + c.true_negative);
      return c.true_positive / pos - c.false_positive / neg;
    };
    double best = youden(t);
    for (int k = 0; k <= 1000; ++k) CHECK(youden(k / 1000.0) <= best + 1e-9);
  }
}

TEST_CASE("apply_threshold") {
  ScoreVector s{{0.2, 0.5, 0.7}, "x"};
  auto l = apply_threshold(s, 0.5);
  CHECK(l == std::vector<Label>{Label::Honest, Label::Sybil, Label::Sybil});
}

TEST_CASE("predict holds out nodes for the threshold") {
  Graph g = two_cliques();
  TrainSplit split{{0, 1, 2, 3, 4}, {11, 12, 13, 14, 15}};
  GatHyper h;
  h.max_epochs = 40;
  auto trained = train_gat(g, split, h);
  auto p = predict(trained.model, g, split, 3);
  CHECK(p.input_known.known_count() + p.threshold_known.known_count() == split.known_count());
  CHECK(p.threshold_known.known_honest.size() >= 1);
  CHECK(p.threshold_known.known_sybil.size() >= 1);
  CHECK(p.labels.size() == 16);
  auto again = predict(trained.model, g, split, 3);
  CHECK(again.scores.values == p.scores.values);
  CHECK(again.threshold == p.threshold);
}

TEST_CASE("checkpoint round trip") {
  auto dir = testing::scratch_dir("gat-checkpoint");
  GatHyper h = tiny_hyper(3, 2, 2);
  h.seed = 99;
  Rng rng(11);
  GatModel model = GatModel::initialize(h, rng);
  save_checkpoint(model, 0.4375, dir / "model.json");
  Checkpoint back = load_checkpoint(dir / "model.json");
  CHECK(back.model == model);
  CHECK(back.threshold == 0.4375);

  testing::write_text(dir / "bad.json", "{\"format\": \"other\"}");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), IoError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), IoError);
}
