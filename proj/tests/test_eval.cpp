#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "sybillab/error.hpp"
#include "sybillab/eval.hpp"

using namespace sybillab;

namespace {

constexpr Label H = Label::Honest;
constexpr Label S = Label::Sybil;

// Direct pair count: P[s_sybil > s_honest] + ties / 2.
double pairwise_auc(const std::vector<double>& s, const std::vector<Label>& l) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (l[i] != S) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j] != H) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

void random_case(Rng& rng, std::vector<double>& s, std::vector<Label>& l) {
  std::size_t n = 2 + rng.uniform_index(40);
  s.resize(n);
  l.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::round(rng.uniform01() * 10) / 10;  // coarse grid forces ties
    l[i] = rng.bernoulli(0.4) ? S : H;
  }
  l[0] = H;
  l[1] = S;
}

}  // namespace

TEST_CASE("auc examples") {
  CHECK(auc(std::vector<double>{0.1, 0.9}, std::vector<Label>{H, S}) == 1.0);
  CHECK(auc(std::vector<double>{0.5, 0.5}, std::vector<Label>{H, S}) == 0.5);
  CHECK(auc(std::vector<double>{0.9, 0.1}, std::vector<Label>{H, S}) == 0.0);
  CHECK(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<Label>{H, H, S, S}) == doctest::Approx(0.75));
}

TEST_CASE("auc needs both classes") {
  CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.2}, std::vector<Label>{H, H}), InvalidArgument);
  CHECK_THROWS_AS(auc(std::vector<double>{0.1}, std::vector<Label>{H, S}), InvalidArgument);
}

TEST_CASE("auc matches the pairwise count") {
  Rng rng(1);
  std::vector<double> s;
  std::vector<Label> l;
  for (int t = 0; t < 200; ++t) {
    random_case(rng, s, l);
    CHECK(auc(s, l) == doctest::Approx(pairwise_auc(s, l)).epsilon(1e-12));
  }
}

TEST_CASE("swapping classes mirrors the auc") {
  Rng rng(2);
  std::vector<double> s;
  std::vector<Label> l;
  for (int t = 0; t < 50; ++t) {
    random_case(rng, s, l);
    std::vector<Label> flipped(l);
    for (auto& x : flipped) x = x == S ? H : S;
    CHECK(auc(s, l) + auc(s, flipped) == doctest::Approx(1.0));
  }
}

TEST_CASE("trapezoid area of the roc equals the auc") {
  Rng rng(3);
  std::vector<double> s;
  std::vector<Label> l;
  for (int t = 0; t < 100; ++t) {
    random_case(rng, s, l);
    auto roc = roc_points(s, l);
    CHECK(roc.front() == std::pair<double, double>{0.0, 0.0});
    CHECK(roc.back() == std::pair<double, double>{1.0, 1.0});
    CHECK(trapezoid_area(roc) == doctest::Approx(auc(s, l)).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under increasing transforms") {
  Rng rng(4);
  std::vector<double> s;
  std::vector<Label> l;
  for (int t = 0; t < 50; ++t) {
    random_case(rng, s, l);
    std::vector<double> warped(s);
    for (auto& x : warped) x = 1.0 / (1.0 + std::exp(-5.0 * x)) * 0.3 + 0.1;
    CHECK(auc(warped, l) == doctest::Approx(auc(s, l)));
  }
}

TEST_CASE("auc_on restricts to the node set") {
  ScoreVector s{{0.9, 0.1, 0.2, 0.8}, "x"};
  RegionLabels regions = RegionLabels::blocks(2, 2);
  // Known nodes 0 and 2 are mis-scored; test nodes 1 and 3 are perfect.
  CHECK(auc_on(s, regions, std::vector<NodeId>{1, 3}) == 1.0);
  CHECK(auc_on(s, regions, std::vector<NodeId>{0, 1, 2, 3}) == doctest::Approx(0.5));
}

TEST_CASE("confusion at a threshold") {
  std::vector<double> s{0.1, 0.6, 0.4, 0.9, 0.5};
  std::vector<Label> l{H, H, S, S, S};
  auto c = confusion_at(s, l, 0.5);
  CHECK(c.true_positive == 2);
  CHECK(c.false_positive == 1);
  CHECK(c.true_negative == 1);
  CHECK(c.false_negative == 1);
  CHECK(c.accuracy == doctest::Approx(0.6));
  CHECK(c.precision == doctest::Approx(2.0 / 3.0));
  CHECK(c.recall == doctest::Approx(2.0 / 3.0));
  auto none = confusion_at(s, l, 2.0);
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
}

TEST_CASE("evaluate bundles everything") {
  std::vector<double> s{0.1, 0.9};
  std::vector<Label> l{H, S};
  auto r = evaluate(s, l, 0.5);
  CHECK(r.auc == 1.0);
  CHECK(r.at_threshold.accuracy == 1.0);
  CHECK(r.roc.size() >= 3);
}
