#pragma once

// Independent reference implementations used by the tests. None of these
// call into the library; they recompute each quantity the slow, obvious way.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Counts {
  double tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Counts count(const std::vector<int>& preds, const std::vector<int>& labels) {
  Counts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == 1 && labels[i] == 1) c.tp += 1;
    if (preds[i] == 1 && labels[i] == 0) c.fp += 1;
    if (preds[i] == 0 && labels[i] == 0) c.tn += 1;
    if (preds[i] == 0 && labels[i] == 1) c.fn += 1;
  }
  return c;
}

// MCC as the Pearson correlation of the two 0/1 vectors.
inline double mcc(const std::vector<int>& preds, const std::vector<int>& labels) {
  const double n = static_cast<double>(preds.size());
  double mp = 0, my = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    mp += preds[i];
    my += labels[i];
  }
  mp /= n;
  my /= n;
  double cov = 0, vp = 0, vy = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    cov += (preds[i] - mp) * (labels[i] - my);
    vp += (preds[i] - mp) * (preds[i] - mp);
    vy += (labels[i] - my) * (labels[i] - my);
  }
  if (vp == 0 || vy == 0) return 0.0;
  return cov / std::sqrt(vp * vy);
}

inline double tpr(const std::vector<int>& preds, const std::vector<int>& labels) {
  double hit = 0, pos = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (labels[i] == 1) {
      pos += 1;
      hit += preds[i];
    }
  return pos == 0 ? 0.0 : hit / pos;
}

inline double f1(const std::vector<int>& preds, const std::vector<int>& labels) {
  const auto c = count(preds, labels);
  const double p = c.tp + c.fp == 0 ? 0.0 : c.tp / (c.tp + c.fp);
  const double r = c.tp + c.fn == 0 ? 0.0 : c.tp / (c.tp + c.fn);
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

inline double nmcc(double m) { return (1.0 - m) / 2.0; }

// P(score+ > score-) + 0.5 P(tie) over all positive/negative pairs.
inline double auc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

inline double spread(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
}

inline double dp(const std::vector<int>& preds, const std::vector<std::string>& groups, std::size_t min_support = 2) {
  std::map<std::string, std::pair<double, double>> by;  // n, selected
  for (std::size_t i = 0; i < preds.size(); ++i) {
    by[groups[i]].first += 1;
    by[groups[i]].second += preds[i];
  }
  std::vector<double> rates;
  for (const auto& [g, v] : by)
    if (v.first >= static_cast<double>(min_support)) rates.push_back(v.second / v.first);
  return spread(rates);
}

inline double eo(const std::vector<int>& preds, const std::vector<int>& labels, const std::vector<std::string>& groups,
                 std::size_t min_support = 2) {
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < preds.size(); ++i) members[groups[i]].push_back(i);
  std::vector<double> tprs, fprs;
  for (const auto& [g, idx] : members) {
    if (idx.size() < min_support) continue;
    double tp = 0, p = 0, fp = 0, ng = 0;
    for (auto i : idx) {
      if (labels[i] == 1) {
        p += 1;
        tp += preds[i];
      } else {
        ng += 1;
        fp += preds[i];
      }
    }
    if (p > 0) tprs.push_back(tp / p);
    if (ng > 0) fprs.push_back(fp / ng);
  }
  return std::max(spread(tprs), spread(fprs));
}

// ROC vertices from an explicit threshold list: for each distinct score t
// (descending) the point (FPR, TPR) of the rule score >= t.
inline std::vector<std::pair<double, double>> roc_vertices(const std::vector<double>& scores,
                                                           const std::vector<int>& labels) {
  std::vector<double> thr = scores;
  std::sort(thr.begin(), thr.end(), std::greater<>());
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
  double pos = 0, neg = 0;
  for (int y : labels) (y == 1 ? pos : neg) += 1;
  std::vector<std::pair<double, double>> v{{0.0, 0.0}};
  for (double t : thr) {
    double tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= t) (labels[i] == 1 ? tp : fp) += 1;
    v.emplace_back(fp / neg, tp / pos);
  }
  return v;
}

// Piecewise-linear ROC value at x; the highest TPR among vertices at x.
inline double roc_at(const std::vector<std::pair<double, double>>& v, double x) {
  double best = -1;
  for (const auto& [f, t] : v)
    if (f == x) best = std::max(best, t);
  if (best >= 0) return best;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i - 1].first < x && x < v[i].first) {
      const double w = (x - v[i - 1].first) / (v[i].first - v[i - 1].first);
      return v[i - 1].second + w * (v[i].second - v[i - 1].second);
    }
  }
  return 1.0;
}

// Largest pairwise area between group ROC curves on a fine grid.
inline double abroca(const std::vector<double>& scores, const std::vector<int>& labels,
                     const std::vector<std::string>& groups, std::size_t min_support = 4, std::size_t grid = 10001) {
  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> by;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    by[groups[i]].first.push_back(scores[i]);
    by[groups[i]].second.push_back(labels[i]);
  }
  std::vector<std::vector<double>> curves;
  for (const auto& [g, sy] : by) {
    const auto& y = sy.second;
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (y.size() < min_support || pos == 0 || pos == static_cast<long>(y.size())) continue;
    const auto v = roc_vertices(sy.first, y);
    std::vector<double> c(grid);
    for (std::size_t i = 0; i < grid; ++i) c[i] = roc_at(v, static_cast<double>(i) / static_cast<double>(grid - 1));
    curves.push_back(std::move(c));
  }
  double worst = 0;
  for (std::size_t a = 0; a < curves.size(); ++a)
    for (std::size_t b = a + 1; b < curves.size(); ++b) {
      double area = 0;
      for (std::size_t i = 1; i < grid; ++i)
        area += 0.5 * (std::abs(curves[a][i] - curves[b][i]) + std::abs(curves[a][i - 1] - curves[b][i - 1]));
      worst = std::max(worst, area / static_cast<double>(grid - 1));
    }
  return worst;
}

// Two-sided exact Wilcoxon p-value by enumerating all 2^n sign assignments
// of the (mid)ranks of |d|; zero differences dropped.
struct WilcoxonExact {
  double statistic = 0;
  double p_value = 1;
};

inline WilcoxonExact wilcoxon_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] - a[i] != 0) d.push_back(b[i] - a[i]);
  const std::size_t n = d.size();
  if (n == 0) return {0, 1};
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) below += 1;
      else if (std::abs(d[j]) == std::abs(d[i])) equal += 1;
    }
    ranks[i] = below + (equal + 1) / 2.0;
  }
  double total = 0, wplus = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ranks[i];
    if (d[i] > 0) wplus += ranks[i];
  }
  const double stat = std::min(wplus, total - wplus);
  double extreme = 0;
  const std::uint64_t m = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < m; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += ranks[i];
    if (std::min(w, total - w) <= stat + 1e-9) extreme += 1;
  }
  return {stat, std::min(1.0, extreme / static_cast<double>(m))};
}

inline double paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m += b[i] - a[i];
  m /= n;
  double ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (b[i] - a[i] - m) * (b[i] - a[i] - m);
  const double sd = std::sqrt(ss / (n - 1));
  return m / (sd / std::sqrt(n));
}

}  // namespace oracle
