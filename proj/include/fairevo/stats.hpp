#pragma once

/// @file stats.hpp
/// Paired-comparison statistics for the experiment harness: Shapiro-Wilk
/// normality (Royston's approximation), paired t-test, exact/normal
/// Wilcoxon signed-rank, Bonferroni-corrected verdicts, Pearson r.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "fairevo/error.hpp"

namespace fairevo::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) return std::nan("");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1); 0 for fewer than two values.
inline double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Pearson correlation; empty when either side has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ContractError("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

namespace detail {

inline double poly(std::span<const double> c, double x) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

inline double norm_ppf(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }
inline double norm_sf(double z) { return boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), z)); }

}  // namespace detail

/// Shapiro-Wilk W and p-value for 3 <= n <= 5000 (Royston 1995).
/// A sample with zero range is reported as W = 1, p = 1.
inline TestResult shapiro_wilk(std::span<const double> sample) {
  const auto n = sample.size();
  if (n < 3) throw ContractError("shapiro_wilk: need at least 3 observations");
  if (n > 5000) throw ContractError("shapiro_wilk: more than 5000 observations");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (x.back() - x.front() < 1e-19 * std::max(1.0, std::abs(x.back()))) return {1.0, 1.0};

  const double an = static_cast<double>(n);
  const auto half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
  } else {
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = detail::norm_ppf((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = detail::poly(c1, rsn) - m[0] / ssumm2;
    std::size_t first;
    double fac;
    if (n > 5) {
      const double a2 = -m[1] / ssumm2 + detail::poly(c2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
      first = 2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
      first = 1;
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / an;
  double ssq = 0.0;
  for (double v : x) ssq += (v - mu) * (v - mu);
  double num = 0.0;
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  double w = std::min(1.0, num * num / ssq);

  if (n == 3) {
    constexpr double pi6 = 1.90985931710274;  // 6/pi
    constexpr double stqr = 1.04719755119660;  // pi/3
    return {w, std::max(0.0, std::min(1.0, pi6 * (std::asin(std::sqrt(w)) - stqr)))};
  }
  const double w1 = std::log(1.0 - w);
  double y, mean_z, sd_z;
  if (n <= 11) {
    static constexpr double g[] = {-2.273, 0.459};
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    const double gamma = detail::poly(g, an);
    if (w1 >= gamma) return {w, 1e-99};
    y = -std::log(gamma - w1);
    mean_z = detail::poly(c3, an);
    sd_z = std::exp(detail::poly(c4, an));
  } else {
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};
    const double ln = std::log(an);
    y = w1;
    mean_z = detail::poly(c5, ln);
    sd_z = std::exp(detail::poly(c6, ln));
  }
  return {w, detail::norm_sf((y - mean_z) / sd_z)};
}

/// Paired t-test on differences d = b - a; two-sided p-value.
inline TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("paired_t_test: length mismatch");
  if (a.size() < 2) throw ContractError("paired_t_test: need at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
  const double m = mean(d);
  const double sd = stddev(d);
  const double n = static_cast<double>(d.size());
  if (sd == 0.0) {
    if (m == 0.0) return {0.0, 1.0};
    return {m > 0 ? INFINITY : -INFINITY, 0.0};
  }
  const double t = m / (sd / std::sqrt(n));
  boost::math::students_t_distribution<double> dist(n - 1.0);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {t, std::min(1.0, p)};
}

/// Midranks of |d| over the non-zero differences.
inline std::vector<double> signed_rank_ranks(std::span<const double> abs_diffs) {
  const auto n = abs_diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return abs_diffs[i] < abs_diffs[j]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && abs_diffs[order[j + 1]] == abs_diffs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline constexpr std::size_t kWilcoxonExactMax = 50;

/// Wilcoxon signed-rank on d = b - a. Zero differences are dropped. The
/// statistic is min(W+, W-); the two-sided p-value is exact (over all sign
/// assignments of the observed midranks) for up to 50 non-zero pairs and
/// normal-approximated with tie and continuity corrections beyond that.
inline TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("wilcoxon_signed_rank: length mismatch");
  std::vector<double> absd, sign;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = b[i] - a[i];
    if (d == 0.0) continue;
    absd.push_back(std::abs(d));
    sign.push_back(d > 0 ? 1.0 : -1.0);
  }
  const auto n = absd.size();
  if (n == 0) return {0.0, 1.0};
  const auto ranks = signed_rank_ranks(absd);
  double w_plus = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += ranks[i];
    if (sign[i] > 0) w_plus += ranks[i];
  }
  const double w_minus = total - w_plus;
  const double stat = std::min(w_plus, w_minus);

  if (n <= kWilcoxonExactMax) {
    // Midranks are multiples of 1/2; work in doubled ranks.
    std::vector<std::size_t> r2(n);
    std::size_t max_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      r2[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      max_sum += r2[i];
    }
    std::vector<double> count(max_sum + 1, 0.0);
    count[0] = 1.0;
    std::size_t reach = 0;
    for (auto r : r2) {
      reach += r;
      for (std::size_t s = reach; s >= r; --s) {
        count[s] += count[s - r];
        if (s == r) break;
      }
    }
    const double all = std::ldexp(1.0, static_cast<int>(n));
    const auto obs = static_cast<std::size_t>(std::llround(2.0 * w_plus));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
      if (s <= obs) lower += count[s];
      if (s >= obs) upper += count[s];
    }
    return {stat, std::min(1.0, 2.0 * std::min(lower, upper) / all)};
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  // tie correction
  std::vector<double> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (var <= 0.0) return {stat, 1.0};
  const double z = (std::abs(w_plus - mu) - 0.5) / std::sqrt(var);
  return {stat, std::min(1.0, 2.0 * detail::norm_sf(std::max(0.0, z)))};
}

struct Verdict {
  std::string test = "none";  // "t-test", "wilcoxon" or "none"
  double statistic = 0.0;
  double p_value = 1.0;
  double normality_p = 1.0;
  double alpha_corrected = 0.05;
  bool significant = false;              // at the Bonferroni-corrected level
  bool significant_uncorrected = false;  // at alpha
};

inline constexpr std::size_t kMinPairedSamples = 5;

/// Paired comparison of one metric: Shapiro-Wilk (alpha 0.05) on the paired
/// differences picks the t-test when normal, Wilcoxon otherwise; the
/// decision level is alpha / n_metrics.
inline Verdict significance(std::span<const double> baseline, std::span<const double> fair, std::size_t n_metrics,
                            double alpha = 0.05) {
  if (baseline.size() != fair.size()) throw ContractError("significance: length mismatch");
  if (baseline.size() < kMinPairedSamples) throw ContractError("significance: need at least 5 paired samples");
  if (n_metrics == 0) throw ContractError("significance: n_metrics must be >= 1");
  Verdict v;
  v.alpha_corrected = alpha / static_cast<double>(n_metrics);
  std::vector<double> d(baseline.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = fair[i] - baseline[i];
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return v;

  v.normality_p = shapiro_wilk(d).p_value;
  const auto r = v.normality_p > alpha ? paired_t_test(baseline, fair) : wilcoxon_signed_rank(baseline, fair);
  v.test = v.normality_p > alpha ? "t-test" : "wilcoxon";
  v.statistic = r.statistic;
  v.p_value = r.p_value;
  v.significant = v.p_value < v.alpha_corrected;
  v.significant_uncorrected = v.p_value < alpha;
  return v;
}

/// Percentage change from baseline to fair; empty when the baseline is 0.
inline std::optional<double> pct_change(double baseline_mean, double fair_mean) {
  if (baseline_mean == 0.0 || !std::isfinite(baseline_mean) || !std::isfinite(fair_mean)) return std::nullopt;
  return (fair_mean - baseline_mean) / baseline_mean * 100.0;
}

}  // namespace fairevo::stats
