#pragma once

/// @file fairness.hpp
/// Intersectional subgroups and the three group-fairness distances:
///  - DP: max - min selection rate across groups
///  - EO: max of the TPR spread and the FPR spread across groups
///  - ABROCA: largest pairwise area between group ROC curves
/// Groups that lack support are excluded; with fewer than two eligible
/// groups a distance is 0.

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fairevo/data.hpp"
#include "fairevo/error.hpp"
#include "fairevo/metrics.hpp"

namespace fairevo {

struct FairnessOptions {
  std::size_t min_support = 2;      // DP and EO
  std::size_t min_support_roc = 4;  // ABROCA
  std::size_t roc_grid_points = 101;
};

struct GroupSupport {
  std::size_t n = 0;
  std::size_t n_positive = 0;
  friend bool operator==(const GroupSupport&, const GroupSupport&) = default;
};

/// Partition of evaluated rows into the observed cells of the cross-product
/// of all sensitive attributes. Row positions are relative to the row list
/// the index was built from, so they align with prediction vectors.
class SubgroupIndex {
 public:
  SubgroupIndex() = default;

  const std::vector<std::string>& attributes() const noexcept { return attributes_; }
  const std::vector<std::vector<std::string>>& descriptors() const noexcept { return descriptors_; }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }
  const std::vector<GroupSupport>& support() const noexcept { return support_; }
  std::size_t n_groups() const noexcept { return descriptors_.size(); }
  std::size_t n_rows() const noexcept { return assignment_.size(); }

  std::string describe(std::size_t g) const {
    std::string s;
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
      if (a) s += " & ";
      s += attributes_[a] + "=" + descriptors_[g][a];
    }
    return s;
  }

  /// `categories[i]` holds row i's category for every attribute.
  static SubgroupIndex build(std::vector<std::string> attributes, std::span<const std::vector<std::string>> categories,
                             std::span<const int> labels) {
    if (attributes.empty()) throw ConfigError("build_subgroups: no sensitive attributes declared");
    if (categories.size() != labels.size()) throw ContractError("build_subgroups: length mismatch");
    std::map<std::vector<std::string>, std::size_t> ids;
    for (const auto& cats : categories) {
      if (cats.size() != attributes.size()) throw ContractError("build_subgroups: descriptor arity mismatch");
      ids.emplace(cats, 0);
    }
    SubgroupIndex sg;
    sg.attributes_ = std::move(attributes);
    for (auto& [desc, id] : ids) {
      id = sg.descriptors_.size();
      sg.descriptors_.push_back(desc);
    }
    sg.support_.resize(sg.descriptors_.size());
    sg.assignment_.reserve(categories.size());
    for (std::size_t i = 0; i < categories.size(); ++i) {
      const auto g = ids.at(categories[i]);
      sg.assignment_.push_back(g);
      ++sg.support_[g].n;
      sg.support_[g].n_positive += labels[i] != 0;
    }
    return sg;
  }

  /// Single-attribute index from integer group ids.
  static SubgroupIndex from_group_ids(std::span<const int> ids, std::span<const int> labels) {
    std::vector<std::vector<std::string>> cats;
    cats.reserve(ids.size());
    for (int id : ids) cats.push_back({std::to_string(id)});
    return build({"group"}, cats, labels);
  }

 private:
  std::vector<std::string> attributes_;
  std::vector<std::vector<std::string>> descriptors_;
  std::vector<std::size_t> assignment_;
  std::vector<GroupSupport> support_;
};

inline const std::string kMissingCategory = "NA";

/// Subgroups over `rows` of a dataset using its declared sensitive columns.
inline SubgroupIndex build_subgroups(const TabularDataset& ds, std::span<const std::size_t> rows) {
  const auto& sens = ds.sensitive_columns();
  if (sens.empty()) throw ConfigError("build_subgroups: dataset declares no sensitive attributes");
  std::vector<std::string> attrs;
  for (auto c : sens) attrs.push_back(ds.column(c).name);
  std::vector<std::vector<std::string>> cats;
  std::vector<int> labels;
  cats.reserve(rows.size());
  labels.reserve(rows.size());
  for (auto r : rows) {
    std::vector<std::string> d;
    d.reserve(sens.size());
    for (auto c : sens) {
      const Cell& v = ds.cell(r, c);
      if (is_missing(v)) d.push_back(kMissingCategory);
      else if (std::holds_alternative<std::string>(v)) d.push_back(std::get<std::string>(v));
      else d.push_back(std::to_string(std::get<double>(v)));
    }
    cats.push_back(std::move(d));
    labels.push_back(ds.labels()[r]);
  }
  return SubgroupIndex::build(std::move(attrs), cats, labels);
}

namespace detail {

inline void check_aligned(std::size_t n, const SubgroupIndex& sg, const char* who) {
  if (n != sg.n_rows()) throw ContractError(std::string(who) + ": input length does not match subgroup index");
}

inline double spread(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace detail

inline double demographic_parity(std::span<const int> preds, const SubgroupIndex& sg, const FairnessOptions& opt = {}) {
  detail::check_aligned(preds.size(), sg, "demographic_parity");
  std::vector<std::size_t> n(sg.n_groups()), sel(sg.n_groups());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto g = sg.assignment()[i];
    ++n[g];
    sel[g] += preds[i] != 0;
  }
  std::vector<double> rates;
  for (std::size_t g = 0; g < n.size(); ++g)
    if (n[g] >= opt.min_support && n[g] > 0) rates.push_back(static_cast<double>(sel[g]) / static_cast<double>(n[g]));
  return detail::spread(rates);
}

/// Groups with at least min_support rows contribute to the TPR spread when
/// they have a positive label and to the FPR spread when they have a negative.
inline double equalized_odds(std::span<const int> preds, std::span<const int> labels, const SubgroupIndex& sg,
                             const FairnessOptions& opt = {}) {
  detail::check_aligned(preds.size(), sg, "equalized_odds");
  detail::check_aligned(labels.size(), sg, "equalized_odds");
  std::vector<ConfusionCounts> cc(sg.n_groups());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& c = cc[sg.assignment()[i]];
    const bool p = preds[i] != 0, y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  std::vector<double> tprs, fprs;
  for (const auto& c : cc) {
    if (c.total() == 0 || c.total() < opt.min_support) continue;
    if (c.tp + c.fn > 0) tprs.push_back(tpr(c));
    if (c.fp + c.tn > 0) fprs.push_back(fpr(c));
  }
  return std::max(detail::spread(tprs), detail::spread(fprs));
}

/// TPR of a ROC curve at `x`, linear between vertices; on vertical
/// segments the upper vertex is used.
inline double roc_tpr_at(const RocCurve& roc, double x) {
  const auto& p = roc.points;
  // last vertex with fpr <= x
  auto it = std::upper_bound(p.begin(), p.end(), x, [](double v, const RocPoint& q) { return v < q.fpr; });
  if (it == p.begin()) return p.front().tpr;
  const auto& left = *std::prev(it);
  if (left.fpr == x || it == p.end()) return left.tpr;
  const auto& right = *it;
  const double t = (x - left.fpr) / (right.fpr - left.fpr);
  return left.tpr + t * (right.tpr - left.tpr);
}

inline std::vector<double> interpolate_roc(const RocCurve& roc, std::size_t grid_points) {
  if (grid_points < 2) throw ContractError("interpolate_roc: need at least 2 grid points");
  std::vector<double> out(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i)
    out[i] = roc_tpr_at(roc, static_cast<double>(i) / static_cast<double>(grid_points - 1));
  return out;
}

/// Per-group ROC curves for the groups eligible for ABROCA, in group order.
inline std::vector<RocCurve> eligible_group_rocs(std::span<const double> scores, std::span<const int> labels,
                                                 const SubgroupIndex& sg, const FairnessOptions& opt = {}) {
  std::vector<std::vector<double>> s(sg.n_groups());
  std::vector<std::vector<int>> y(sg.n_groups());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto g = sg.assignment()[i];
    s[g].push_back(scores[i]);
    y[g].push_back(labels[i] != 0 ? 1 : 0);
  }
  std::vector<RocCurve> rocs;
  for (std::size_t g = 0; g < s.size(); ++g) {
    const auto pos = static_cast<std::size_t>(std::count(y[g].begin(), y[g].end(), 1));
    if (s[g].size() < opt.min_support_roc || pos == 0 || pos == s[g].size()) continue;
    rocs.push_back(roc_and_auc(s[g], y[g]));
  }
  return rocs;
}

inline double abroca(std::span<const double> scores, std::span<const int> labels, const SubgroupIndex& sg,
                     const FairnessOptions& opt = {}) {
  detail::check_aligned(scores.size(), sg, "abroca");
  detail::check_aligned(labels.size(), sg, "abroca");
  const auto rocs = eligible_group_rocs(scores, labels, sg, opt);
  if (rocs.size() < 2) return 0.0;
  std::vector<std::vector<double>> curves;
  curves.reserve(rocs.size());
  for (const auto& r : rocs) curves.push_back(interpolate_roc(r, opt.roc_grid_points));
  double worst = 0.0;
  for (std::size_t a = 0; a < curves.size(); ++a) {
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      // trapezoid rule on the uniform grid
      const std::size_t last = curves[a].size() - 1;
      double sum = 0.0;
      for (std::size_t i = 0; i <= last; ++i) {
        const double w = (i == 0 || i == last) ? 0.5 : 1.0;
        sum += w * std::abs(curves[a][i] - curves[b][i]);
      }
      worst = std::max(worst, sum / static_cast<double>(last));
    }
  }
  return std::clamp(worst, 0.0, 1.0);
}

inline double fairness_component(double dp, double eo, double abroca_value) {
  for (double v : {dp, eo, abroca_value})
    if (!(v >= 0.0 && v <= 1.0)) throw ContractError("fairness_component: metric outside [0,1]");
  return (dp + eo + abroca_value) / 3.0;
}

struct FairnessBundle {
  double dp = 0.0;
  double eo = 0.0;
  double abroca = 0.0;
  double fairness_component = 0.0;
  std::size_t evaluated_groups = 0;

  friend bool operator==(const FairnessBundle&, const FairnessBundle&) = default;
};

inline FairnessBundle evaluate_fairness(std::span<const double> scores, std::span<const int> labels,
                                        const SubgroupIndex& sg, const FairnessOptions& opt = {}) {
  const auto preds = threshold_scores(scores);
  FairnessBundle b;
  b.dp = demographic_parity(preds, sg, opt);
  b.eo = equalized_odds(preds, labels, sg, opt);
  b.abroca = abroca(scores, labels, sg, opt);
  b.fairness_component = fairness_component(b.dp, b.eo, b.abroca);
  b.evaluated_groups = static_cast<std::size_t>(
      std::count_if(sg.support().begin(), sg.support().end(), [&](const GroupSupport& s) { return s.n >= opt.min_support; }));
  return b;
}

}  // namespace fairevo
