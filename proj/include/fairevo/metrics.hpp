#pragma once

/// @file metrics.hpp
/// Confusion-matrix metrics, ROC/AUC and the performance component of the
/// fitness: (nMCC + (1 - TPR)) / 2, where nMCC = 1 - (MCC + 1) / 2.
/// Every quantity here is bounded; degenerate denominators yield 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fairevo/error.hpp"

namespace fairevo {

inline constexpr double kDecisionThreshold = 0.5;

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw ContractError("confusion: length mismatch");
  if (preds.empty()) throw ContractError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline std::vector<int> threshold_scores(std::span<const double> scores, double threshold = kDecisionThreshold) {
  std::vector<int> preds(scores.size());
  std::transform(scores.begin(), scores.end(), preds.begin(), [&](double s) { return s >= threshold ? 1 : 0; });
  return preds;
}

inline double mcc(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn), fn = static_cast<double>(c.fn);
  const double d1 = tp + fp, d2 = tp + fn, d3 = tn + fp, d4 = tn + fn;
  if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) return 0.0;
  const double v = (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
  return std::clamp(v, -1.0, 1.0);
}

/// Normalised, inverted MCC in [0,1]; 0 for a perfect classifier.
inline double nmcc(double mcc_value) {
  if (!(mcc_value >= -1.0 && mcc_value <= 1.0)) throw ContractError("nmcc: mcc outside [-1,1]");
  return 1.0 - (mcc_value + 1.0) / 2.0;
}

inline double tpr(const ConfusionCounts& c) {
  const auto pos = c.tp + c.fn;
  return pos == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(pos);
}

inline double fpr(const ConfusionCounts& c) {
  const auto neg = c.fp + c.tn;
  return neg == 0 ? 0.0 : static_cast<double>(c.fp) / static_cast<double>(neg);
}

inline double precision(const ConfusionCounts& c) {
  const auto pp = c.tp + c.fp;
  return pp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(pp);
}

inline double f1(const ConfusionCounts& c) {
  const auto denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) ... (1,1), non-decreasing in both axes
  double auc = 0.0;
};

/// ROC by a descending-score threshold sweep. Equal scores form a single
/// step, so ties contribute a diagonal segment (half credit).
inline RocCurve roc_and_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ContractError("roc_and_auc: length mismatch");
  const auto n_pos = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
  const auto n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("roc_and_auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area2 = 0.0;  // twice the area in (fp, tp) count units
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::size_t dtp = 0, dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      if (labels[order[i]] != 0) ++dtp;
      else ++dfp;
    }
    area2 += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                          static_cast<double>(tp) / static_cast<double>(n_pos)});
  }
  roc.auc = area2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return roc;
}

inline double performance_component(double mcc_value, double tpr_value) {
  if (!(tpr_value >= 0.0 && tpr_value <= 1.0)) throw ContractError("performance_component: tpr outside [0,1]");
  return (nmcc(mcc_value) + (1.0 - tpr_value)) / 2.0;
}

struct PerformanceBundle {
  double mcc = 0.0;
  double nmcc = 0.5;
  double tpr = 0.0;
  double f1 = 0.0;
  double aucroc = 0.5;
  double performance_component = 0.75;

  friend bool operator==(const PerformanceBundle&, const PerformanceBundle&) = default;
};

inline PerformanceBundle make_performance(const ConfusionCounts& c, double aucroc) {
  PerformanceBundle b;
  b.mcc = mcc(c);
  b.nmcc = nmcc(b.mcc);
  b.tpr = tpr(c);
  b.f1 = f1(c);
  b.aucroc = aucroc;
  b.performance_component = performance_component(b.mcc, b.tpr);
  return b;
}

/// All performance metrics for scores thresholded at 0.5.
inline PerformanceBundle evaluate_performance(std::span<const double> scores, std::span<const int> labels) {
  const auto preds = threshold_scores(scores);
  return make_performance(confusion(preds, labels), roc_and_auc(scores, labels).auc);
}

}  // namespace fairevo
