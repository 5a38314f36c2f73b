#include "sybillab/eval.hpp"

#include <algorithm>
#include <numeric>

#include "sybillab/error.hpp"

namespace sybillab {

namespace {

void check_sizes(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("scores and labels differ in length");
}

std::vector<std::size_t> ascending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return order;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const Label> labels) {
  check_sizes(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Sybil));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("auc needs at least one sybil and one honest node");
  }
  auto order = ascending_order(scores);
  // Ranks are 1-based; a tie group spanning positions i..j gets (i+j)/2 + 1.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == Label::Sybil) rank_sum += midrank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(positives);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double auc_on(const ScoreVector& scores, const RegionLabels& regions, std::span<const NodeId> nodes) {
  std::vector<double> s;
  std::vector<Label> l;
  s.reserve(nodes.size());
  l.reserve(nodes.size());
  for (NodeId v : nodes) {
    s.push_back(scores[v]);
    l.push_back(regions[v]);
  }
  return auc(s, l);
}

std::vector<std::pair<double, double>> roc_points(std::span<const double> scores, std::span<const Label> labels) {
  check_sizes(scores, labels);
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), Label::Sybil));
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("roc needs both classes");
  auto order = ascending_order(scores);
  std::reverse(order.begin(), order.end());
  std::vector<std::pair<double, double>> points{{0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) (labels[order[t]] == Label::Sybil ? tp : fp) += 1.0;
    points.emplace_back(fp / negatives, tp / positives);
    i = j + 1;
  }
  return points;
}

double trapezoid_area(const std::vector<std::pair<double, double>>& points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].first - points[i - 1].first) * (points[i].second + points[i - 1].second) / 2.0;
  }
  return area;
}

Confusion confusion_at(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  check_sizes(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool predicted = scores[i] >= threshold;
    bool actual = labels[i] == Label::Sybil;
    if (predicted && actual) ++c.true_positive;
    else if (predicted) ++c.false_positive;
    else if (actual) ++c.false_negative;
    else ++c.true_negative;
  }
  const auto total = static_cast<double>(scores.size());
  const auto tp = static_cast<double>(c.true_positive);
  if (total > 0) c.accuracy = (tp + static_cast<double>(c.true_negative)) / total;
  if (c.true_positive + c.false_positive > 0) c.precision = tp / static_cast<double>(c.true_positive + c.false_positive);
  if (c.true_positive + c.false_negative > 0) c.recall = tp / static_cast<double>(c.true_positive + c.false_negative);
  return c;
}

EvalResult evaluate(std::span<const double> scores, std::span<const Label> labels, double threshold) {
  return {auc(scores, labels), roc_points(scores, labels), confusion_at(scores, labels, threshold)};
}

}  // namespace sybillab
