#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sybillab/graph.hpp"
#include "sybillab/scores.hpp"

namespace sybillab {

/// Mann-Whitney AUC with midranks: P[s(sybil) > s(honest)] + P[equal] / 2.
/// Throws InvalidArgument unless both classes are present.
double auc(std::span<const double> scores, std::span<const Label> labels);

/// AUC over a node subset (typically the unknown test nodes).
double auc_on(const ScoreVector& scores, const RegionLabels& regions, std::span<const NodeId> nodes);

/// ROC polyline from (0, 0) to (1, 1); tied scores produce one diagonal step.
std::vector<std::pair<double, double>> roc_points(std::span<const double> scores, std::span<const Label> labels);

/// Area under a polyline by the trapezoid rule.
double trapezoid_area(const std::vector<std::pair<double, double>>& points);

struct Confusion {
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted Sybil
  double recall = 0.0;
  std::size_t true_positive = 0, false_positive = 0, true_negative = 0, false_negative = 0;
};

/// Predicted Sybil iff score >= threshold.
Confusion confusion_at(std::span<const double> scores, std::span<const Label> labels, double threshold);

struct EvalResult {
  double auc = 0.0;
  std::vector<std::pair<double, double>> roc;
  Confusion at_threshold;
};

EvalResult evaluate(std::span<const double> scores, std::span<const Label> labels, double threshold);

}  // namespace sybillab
