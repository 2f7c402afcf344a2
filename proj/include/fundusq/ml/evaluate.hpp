#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "fundusq/errors.hpp"

namespace fundusq::ml {

inline constexpr double kDecisionThreshold = 0.5;

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct EvaluationReport {
  Confusion confusion;
  double f1 = 0.0;
  std::vector<RocPoint> roc;  // empty when the test set has a single class
  std::optional<double> auc;  // undefined for a single-class test set
};

inline void require_matching(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("evaluate: score/label count mismatch");
  if (scores.empty()) throw InvalidArgument("evaluate: empty test set");
}

/// Positive prediction iff score >= threshold.
inline Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = kDecisionThreshold) {
  require_matching(scores, labels);
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      pred ? ++c.tp : ++c.fn;
    } else {
      pred ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

/// 2TP / (2TP + FP + FN); 0 when there are no positives predicted or present.
inline double f1_score(const Confusion& c) {
  const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp + c.fn);
  return denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
}

/// Sweeps every distinct score as a threshold, highest first; equal scores
/// enter the curve together. Empty if either class is missing.
inline std::vector<RocPoint> roc_curve(const std::vector<double>& scores,
                                       const std::vector<int>& labels) {
  require_matching(scores, labels);
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) return {};

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) labels[order[i]] == 1 ? ++tp : ++fp;
    pts.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                   static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return pts;
}

inline double trapezoid_area(const std::vector<RocPoint>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  return area;
}

inline std::optional<double> auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  const auto pts = roc_curve(scores, labels);
  if (pts.empty()) return std::nullopt;
  return trapezoid_area(pts);
}

inline EvaluationReport evaluate_scores(const std::vector<double>& scores,
                                        const std::vector<int>& labels) {
  EvaluationReport r;
  r.confusion = confusion_at(scores, labels);
  r.f1 = f1_score(r.confusion);
  r.roc = roc_curve(scores, labels);
  if (!r.roc.empty()) r.auc = trapezoid_area(r.roc);
  return r;
}

}  // namespace fundusq::ml
