#include <gtest/gtest.h>

#include <random>

#include "fairevo/metrics.hpp"
#include "oracles.hpp"

using namespace fairevo;

TEST(Confusion, HandCases) {
  const std::vector<int> a = {1, 0};
  EXPECT_EQ(confusion(a, a), (ConfusionCounts{1, 0, 1, 0}));
  const std::vector<int> p = {1, 1}, y = {0, 0};
  EXPECT_EQ(confusion(p, y).fp, 2u);
  EXPECT_THROW(confusion(std::vector<int>{1}, std::vector<int>{1, 0}), ContractError);
  EXPECT_THROW(confusion(std::vector<int>{}, std::vector<int>{}), ContractError);
}

TEST(Confusion, RandomPairsMatchElementCounter) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + rng() % 80;
    std::vector<int> p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 2);
      y[i] = static_cast<int>(rng() % 2);
    }
    const auto c = confusion(p, y);
    const auto o = oracle::count(p, y);
    EXPECT_EQ(static_cast<double>(c.tp), o.tp);
    EXPECT_EQ(static_cast<double>(c.fp), o.fp);
    EXPECT_EQ(static_cast<double>(c.tn), o.tn);
    EXPECT_EQ(static_cast<double>(c.fn), o.fn);
    EXPECT_EQ(c.total(), n);
  }
}

TEST(Mcc, Endpoints) {
  EXPECT_DOUBLE_EQ(mcc({10, 0, 10, 0}), 1.0);
  EXPECT_DOUBLE_EQ(mcc({0, 10, 0, 10}), -1.0);
  EXPECT_DOUBLE_EQ(mcc({25, 25, 25, 25}), 0.0);
  EXPECT_DOUBLE_EQ(mcc({5, 5, 0, 0}), 0.0);  // degenerate denominator
}

TEST(Nmcc, Eq3Endpoints) {
  EXPECT_EQ(nmcc(1.0), 0.0);
  EXPECT_EQ(nmcc(0.0), 0.5);
  EXPECT_EQ(nmcc(-1.0), 1.0);
  EXPECT_THROW(nmcc(1.5), ContractError);
  EXPECT_THROW(nmcc(std::nan("")), ContractError);
}

TEST(Nmcc, AffineDecreasing) {
  double prev = 2.0;
  for (double m = -1.0; m <= 1.0; m += 0.01) {
    const double v = nmcc(m);
    EXPECT_LT(v, prev);
    EXPECT_NEAR(v, (1.0 - m) / 2.0, 1e-15);
    prev = v;
  }
}

TEST(Tpr, HandCases) {
  EXPECT_DOUBLE_EQ(tpr({3, 0, 0, 1}), 0.75);
  EXPECT_DOUBLE_EQ(tpr({0, 0, 0, 5}), 0.0);
  EXPECT_DOUBLE_EQ(tpr({0, 3, 3, 0}), 0.0);
}

TEST(F1, ClosedFormAndHarmonicMean) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    const ConfusionCounts c{rng() % 20, rng() % 20, rng() % 20, rng() % 20};
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    EXPECT_NEAR(f1(c), denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom, 1e-15);
    const double p = precision(c), r = tpr(c);
    if (p + r > 0) EXPECT_NEAR(f1(c), 2 * p * r / (p + r), 1e-12);
  }
}

TEST(Roc, SeparatingIdenticalAndHandCase) {
  const std::vector<int> y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(roc_and_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, y).auc, 1.0);
  EXPECT_DOUBLE_EQ(roc_and_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y).auc, 0.5);
  const std::vector<double> s8 = {0.9, 0.8, 0.8, 0.6, 0.55, 0.4, 0.3, 0.3};
  const std::vector<int> y8 = {1, 0, 1, 1, 0, 0, 1, 0};
  EXPECT_NEAR(roc_and_auc(s8, y8).auc, oracle::auc_pairwise(s8, y8), 1e-15);
  EXPECT_THROW(roc_and_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), MetricError);
}

TEST(Roc, CurveEndpointsAndMonotone) {
  const auto roc = roc_and_auc(std::vector<double>{0.3, 0.7, 0.1, 0.9, 0.5}, std::vector<int>{0, 1, 0, 1, 1});
  EXPECT_EQ(roc.points.front(), (RocPoint{0.0, 0.0}));
  EXPECT_EQ(roc.points.back(), (RocPoint{1.0, 1.0}));
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_GE(roc.points[i].fpr, roc.points[i - 1].fpr);
    EXPECT_GE(roc.points[i].tpr, roc.points[i - 1].tpr);
  }
}

TEST(Roc, RandomMatchesPairwiseConcordance) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng() % 63;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % 10) / 10.0;  // coarse grid forces ties
      y[i] = static_cast<int>(rng() % 2);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(roc_and_auc(s, y).auc, oracle::auc_pairwise(s, y), 1e-9);
  }
}

TEST(PerformanceComponent, Eq2) {
  EXPECT_EQ(performance_component(1.0, 1.0), 0.0);
  EXPECT_EQ(performance_component(-1.0, 0.0), 1.0);
  EXPECT_EQ(performance_component(0.0, 0.5), 0.5);
}

TEST(PerformanceComponent, MonotoneInMccAndTpr) {
  for (double m = -1.0; m < 1.0; m += 0.1)
    for (double t = 0.0; t < 1.0; t += 0.1) {
      EXPECT_LE(performance_component(std::min(1.0, m + 0.1), t), performance_component(m, t));
      EXPECT_LE(performance_component(m, std::min(1.0, t + 0.1)), performance_component(m, t));
    }
}

TEST(PerformanceBundle, RangesOnAllSmallConfusions) {
  for (std::uint64_t tp = 0; tp < 5; ++tp)
    for (std::uint64_t fp = 0; fp < 5; ++fp)
      for (std::uint64_t tn = 0; tn < 5; ++tn)
        for (std::uint64_t fn = 0; fn < 5; ++fn) {
          const auto b = make_performance({tp, fp, tn, fn}, 0.5);
          EXPECT_GE(b.mcc, -1.0);
          EXPECT_LE(b.mcc, 1.0);
          EXPECT_GE(b.nmcc, 0.0);
          EXPECT_LE(b.nmcc, 1.0);
          EXPECT_GE(b.tpr, 0.0);
          EXPECT_LE(b.tpr, 1.0);
          EXPECT_GE(b.f1, 0.0);
          EXPECT_LE(b.f1, 1.0);
          EXPECT_GE(b.performance_component, 0.0);
          EXPECT_LE(b.performance_component, 1.0);
          EXPECT_DOUBLE_EQ(b.nmcc, 1.0 - (b.mcc + 1.0) / 2.0);
          EXPECT_DOUBLE_EQ(b.performance_component, (b.nmcc + (1.0 - b.tpr)) / 2.0);
        }
}

TEST(EvaluatePerformance, ThresholdIsInclusiveHalf) {
  const std::vector<double> s = {0.5, 0.49};
  const std::vector<int> y = {1, 0};
  const auto b = evaluate_performance(s, y);
  EXPECT_DOUBLE_EQ(b.tpr, 1.0);
  EXPECT_DOUBLE_EQ(b.mcc, 1.0);
}
