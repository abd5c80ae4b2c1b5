#pragma once

/// @file models.hpp
/// Native probability-scoring binary classifiers and their hyperparameter
/// search spaces: logistic regression, Gini decision tree, random forest,
/// Gaussian naive Bayes and k-nearest neighbours.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fairevo/error.hpp"
#include "fairevo/matrix.hpp"
#include "fairevo/random.hpp"

namespace fairevo {

enum class ModelId { logistic_regression, decision_tree, random_forest, gaussian_nb, knn };

inline constexpr std::array<ModelId, 5> kAllModels = {ModelId::logistic_regression, ModelId::decision_tree,
                                                      ModelId::random_forest, ModelId::gaussian_nb, ModelId::knn};

inline std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::logistic_regression: return "logistic_regression";
    case ModelId::decision_tree: return "decision_tree";
    case ModelId::random_forest: return "random_forest";
    case ModelId::gaussian_nb: return "gaussian_nb";
    case ModelId::knn: return "knn";
  }
  return "unknown";
}

inline ModelId model_id_from_string(std::string_view s) {
  for (auto id : kAllModels)
    if (to_string(id) == s) return id;
  throw ContractError("unknown model id '" + std::string(s) + "'");
}

using HyperValue = std::variant<std::int64_t, double, std::string>;

struct ModelSpec {
  ModelId id = ModelId::logistic_regression;
  std::map<std::string, HyperValue> params;

  std::int64_t get_int(const std::string& name) const { return std::get<std::int64_t>(lookup(name)); }
  double get_real(const std::string& name) const {
    const auto& v = lookup(name);
    if (std::holds_alternative<std::int64_t>(v)) return static_cast<double>(std::get<std::int64_t>(v));
    return std::get<double>(v);
  }
  const std::string& get_str(const std::string& name) const { return std::get<std::string>(lookup(name)); }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  const HyperValue& lookup(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end()) throw ContractError(to_string(id) + ": missing hyperparameter '" + name + "'");
    return it->second;
  }
};

struct ParamDef {
  enum class Kind { int_range, real_range, log_real_range, choice };
  std::string name;
  Kind kind = Kind::int_range;
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t step = 1;  // int_range: values lo, lo+step, ..., <= hi
  std::vector<HyperValue> choices;

  HyperValue sample(Rng& rng) const {
    switch (kind) {
      case Kind::int_range: {
        const auto base = static_cast<std::int64_t>(lo);
        const auto count = (static_cast<std::int64_t>(hi) - base) / step;
        return base + step * uniform_int<std::int64_t>(rng, 0, count);
      }
      case Kind::real_range: return lo + (hi - lo) * uniform01(rng);
      case Kind::log_real_range: return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * uniform01(rng));
      case Kind::choice: return choices[uniform_int<std::size_t>(rng, 0, choices.size() - 1)];
    }
    return 0.0;
  }

  bool contains(const HyperValue& v) const {
    switch (kind) {
      case Kind::int_range: {
        if (!std::holds_alternative<std::int64_t>(v)) return false;
        const auto x = std::get<std::int64_t>(v);
        return x >= static_cast<std::int64_t>(lo) && x <= static_cast<std::int64_t>(hi) &&
               (x - static_cast<std::int64_t>(lo)) % step == 0;
      }
      case Kind::real_range:
      case Kind::log_real_range: {
        if (!std::holds_alternative<double>(v)) return false;
        const auto x = std::get<double>(v);
        return x >= lo * (1 - 1e-12) && x <= hi * (1 + 1e-12);
      }
      case Kind::choice: return std::find(choices.begin(), choices.end(), v) != choices.end();
    }
    return false;
  }
};

/// Per-model hyperparameter spaces.
class HyperparamSpace {
 public:
  static HyperparamSpace defaults() {
    using K = ParamDef::Kind;
    HyperparamSpace s;
    s.spaces_[ModelId::logistic_regression] = {
        {"l2", K::log_real_range, 1e-4, 10.0, 1, {}},
        {"epochs", K::choice, 0, 0, 1, {std::int64_t{50}, std::int64_t{100}, std::int64_t{200}}},
        {"lr", K::log_real_range, 1e-3, 0.5, 1, {}},
    };
    s.spaces_[ModelId::decision_tree] = {
        {"max_depth", K::int_range, 2, 16, 1, {}},
        {"min_leaf", K::int_range, 1, 32, 1, {}},
    };
    s.spaces_[ModelId::random_forest] = {
        {"trees", K::int_range, 8, 128, 1, {}},
        {"max_depth", K::int_range, 2, 16, 1, {}},
        {"feature_frac", K::choice, 0, 0, 1, {std::string("sqrt"), std::string("0.5"), std::string("1.0")}},
    };
    s.spaces_[ModelId::gaussian_nb] = {
        {"var_smoothing", K::log_real_range, 1e-9, 1e-3, 1, {}},
    };
    s.spaces_[ModelId::knn] = {
        {"k", K::int_range, 1, 31, 2, {}},
        {"weight", K::choice, 0, 0, 1, {std::string("uniform"), std::string("distance")}},
    };
    return s;
  }

  const std::vector<ParamDef>& params(ModelId id) const { return spaces_.at(id); }

  std::vector<ModelId> models() const {
    std::vector<ModelId> ids;
    for (const auto& [id, _] : spaces_) ids.push_back(id);
    return ids;
  }

  ModelSpec sample_for(ModelId id, Rng& rng) const {
    ModelSpec spec{id, {}};
    for (const auto& p : params(id)) spec.params[p.name] = p.sample(rng);
    return spec;
  }

  /// Uniform over registered models, then each hyperparameter independently.
  ModelSpec sample(Rng& rng) const {
    const auto ids = models();
    return sample_for(ids[uniform_int<std::size_t>(rng, 0, ids.size() - 1)], rng);
  }

  void resample_param(ModelSpec& spec, const std::string& name, Rng& rng) const {
    for (const auto& p : params(spec.id)) {
      if (p.name == name) {
        spec.params[name] = p.sample(rng);
        return;
      }
    }
    throw ContractError("resample_param: unknown hyperparameter '" + name + "'");
  }

  bool contains(const ModelSpec& spec) const {
    auto it = spaces_.find(spec.id);
    if (it == spaces_.end() || spec.params.size() != it->second.size()) return false;
    for (const auto& p : it->second) {
      auto v = spec.params.find(p.name);
      if (v == spec.params.end() || !p.contains(v->second)) return false;
    }
    return true;
  }

 private:
  std::map<ModelId, std::vector<ParamDef>> spaces_;
};

inline ModelSpec sample_spec(std::uint64_t seed, const HyperparamSpace& space = HyperparamSpace::defaults()) {
  Rng rng(mix_seed(seed));
  return space.sample(rng);
}

// ---------------------------------------------------------------------------
// Classifiers

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::vector<double> predict_scores(const Matrix& x) const = 0;
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// L2-regularised logistic regression, full-batch gradient descent from zero.
class LogisticRegression final : public Classifier {
 public:
  struct Params {
    std::vector<double> weights;
    double bias = 0.0;
    friend bool operator==(const Params&, const Params&) = default;
  };

  /// Mean log-loss plus (l2/2)·||w||².
  static double loss(const Params& p, const Matrix& x, std::span<const int> y, double l2) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double z = linear(p, x.row(i));
      // log(1+exp(z)) - y·z, stable form
      const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      total += softplus - (y[i] != 0 ? z : 0.0);
    }
    double reg = 0.0;
    for (double w : p.weights) reg += w * w;
    return total / static_cast<double>(x.rows()) + 0.5 * l2 * reg;
  }

  /// Gradient of loss(); the last element is d/d(bias).
  static std::vector<double> gradient(const Params& p, const Matrix& x, std::span<const int> y, double l2) {
    std::vector<double> g(x.cols() + 1, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto row = x.row(i);
      const double r = sigmoid(linear(p, row)) - (y[i] != 0 ? 1.0 : 0.0);
      for (std::size_t j = 0; j < row.size(); ++j) g[j] += r * row[j];
      g.back() += r;
    }
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t j = 0; j < x.cols(); ++j) g[j] = g[j] * inv_n + l2 * p.weights[j];
    g.back() *= inv_n;
    return g;
  }

  static LogisticRegression fit(const Matrix& x, std::span<const int> y, double l2, std::int64_t epochs, double lr) {
    LogisticRegression m;
    m.params_.weights.assign(x.cols(), 0.0);
    for (std::int64_t e = 0; e < epochs; ++e) {
      const auto g = gradient(m.params_, x, y, l2);
      Params next = m.params_;
      bool finite = std::isfinite(g.back());
      for (std::size_t j = 0; j < x.cols(); ++j) {
        next.weights[j] -= lr * g[j];
        finite = finite && std::isfinite(next.weights[j]);
      }
      next.bias -= lr * g.back();
      if (!finite || !std::isfinite(next.bias)) {
        m.converged_ = false;
        break;
      }
      m.params_ = std::move(next);
    }
    return m;
  }

  std::vector<double> predict_scores(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = sigmoid(linear(params_, x.row(i)));
    return out;
  }

  const Params& params() const noexcept { return params_; }
  bool converged() const noexcept { return converged_; }

 private:
  static double linear(const Params& p, std::span<const double> row) {
    double z = p.bias;
    for (std::size_t j = 0; j < row.size(); ++j) z += p.weights[j] * row[j];
    return z;
  }

  Params params_;
  bool converged_ = true;
};

/// Quantile bin edges per feature, shared by all trees fitted on one matrix.
class FeatureBinner {
 public:
  static constexpr std::size_t kMaxBins = 32;

  static FeatureBinner fit(const Matrix& x) {
    FeatureBinner b;
    b.thresholds_.resize(x.cols());
    std::vector<double> col(x.rows());
    for (std::size_t j = 0; j < x.cols(); ++j) {
      for (std::size_t i = 0; i < x.rows(); ++i) col[i] = x(i, j);
      std::sort(col.begin(), col.end());
      col.erase(std::unique(col.begin(), col.end()), col.end());
      auto& t = b.thresholds_[j];
      if (col.size() <= kMaxBins) {
        for (std::size_t k = 0; k + 1 < col.size(); ++k) t.push_back(0.5 * (col[k] + col[k + 1]));
      } else {
        for (std::size_t q = 1; q < kMaxBins; ++q) {
          const auto k = q * col.size() / kMaxBins;
          const double v = 0.5 * (col[k - 1] + col[k]);
          if (t.empty() || v > t.back()) t.push_back(v);
        }
      }
    }
    b.binned_.resize(x.rows() * x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) b.binned_[i * x.cols() + j] = b.bin_of(j, x(i, j));
    b.cols_ = x.cols();
    return b;
  }

  // Number of thresholds strictly below v; bin <= k  <=>  v <= threshold[k].
  std::uint8_t bin_of(std::size_t feature, double v) const {
    const auto& t = thresholds_[feature];
    return static_cast<std::uint8_t>(std::lower_bound(t.begin(), t.end(), v) - t.begin());
  }

  std::uint8_t binned(std::size_t row, std::size_t feature) const { return binned_[row * cols_ + feature]; }
  const std::vector<double>& thresholds(std::size_t feature) const { return thresholds_[feature]; }
  std::size_t n_features() const noexcept { return cols_; }

 private:
  std::vector<std::vector<double>> thresholds_;
  std::vector<std::uint8_t> binned_;
  std::size_t cols_ = 0;
};

/// CART with Gini impurity on binned features. Leaves hold the positive fraction.
class DecisionTree final : public Classifier {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
    friend bool operator==(const Node&, const Node&) = default;
  };

  struct Options {
    std::int64_t max_depth = 8;
    std::int64_t min_leaf = 1;
    double feature_frac = 1.0;
  };

  /// Fits on the multiset `rows` (duplicates allowed, as in a bootstrap sample).
  static DecisionTree fit_rows(const FeatureBinner& bins, std::span<const int> y, std::vector<std::size_t> rows,
                               const Options& opt, std::uint64_t seed) {
    DecisionTree t;
    Rng rng(mix_seed(seed));
    t.grow(bins, y, rows, 0, opt, rng);
    return t;
  }

  static DecisionTree fit(const Matrix& x, std::span<const int> y, const Options& opt, std::uint64_t seed) {
    const auto bins = FeatureBinner::fit(x);
    std::vector<std::size_t> rows(x.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_rows(bins, y, std::move(rows), opt, seed);
  }

  double score_row(std::span<const double> row) const {
    std::size_t n = 0;
    while (nodes_[n].feature >= 0) {
      const auto& nd = nodes_[n];
      n = static_cast<std::size_t>(row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    return nodes_[n].value;
  }

  std::vector<double> predict_scores(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) out[i] = score_row(x.row(i));
    return out;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  std::int32_t grow(const FeatureBinner& bins, std::span<const int> y, std::vector<std::size_t>& rows,
                    std::int64_t depth, const Options& opt, Rng& rng) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    std::size_t pos = 0;
    for (auto r : rows) pos += y[r] != 0;
    const auto n = rows.size();
    nodes_[static_cast<std::size_t>(id)].value = static_cast<double>(pos) / static_cast<double>(n);

    const auto min_leaf = static_cast<std::size_t>(std::max<std::int64_t>(1, opt.min_leaf));
    if (depth >= opt.max_depth || pos == 0 || pos == n || n < 2 * min_leaf) return id;

    const auto n_feat = bins.n_features();
    std::vector<std::size_t> candidates(n_feat);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    if (opt.feature_frac < 1.0) {
      const auto m = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(opt.feature_frac * static_cast<double>(n_feat))), 1, n_feat);
      for (std::size_t i = 0; i < m; ++i) std::swap(candidates[i], candidates[uniform_int<std::size_t>(rng, i, n_feat - 1)]);
      candidates.resize(m);
      std::sort(candidates.begin(), candidates.end());
    }

    const double nd = static_cast<double>(n);
    const double parent = gini(static_cast<double>(pos), nd) * nd;
    double best_gain = 1e-12;
    std::int32_t best_feature = -1;
    std::size_t best_bin = 0;
    std::array<std::size_t, FeatureBinner::kMaxBins + 1> cnt{}, cpos{};
    for (auto f : candidates) {
      const auto& thr = bins.thresholds(f);
      if (thr.empty()) continue;
      cnt.fill(0);
      cpos.fill(0);
      for (auto r : rows) {
        const auto b = bins.binned(r, f);
        ++cnt[b];
        cpos[b] += y[r] != 0;
      }
      std::size_t ln = 0, lp = 0;
      for (std::size_t b = 0; b < thr.size(); ++b) {
        ln += cnt[b];
        lp += cpos[b];
        const auto rn = n - ln;
        if (ln < min_leaf) continue;
        if (rn < min_leaf) break;
        const double l = static_cast<double>(ln), rr = static_cast<double>(rn);
        const double child = gini(static_cast<double>(lp), l) * l + gini(static_cast<double>(pos - lp), rr) * rr;
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto bf = static_cast<std::size_t>(best_feature);
    std::vector<std::size_t> left, right;
    for (auto r : rows) (bins.binned(r, bf) <= best_bin ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const auto l = grow(bins, y, left, depth + 1, opt, rng);
    const auto r = grow(bins, y, right, depth + 1, opt, rng);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = bins.thresholds(bf)[best_bin];
    node.left = l;
    node.right = r;
    return id;
  }

  static double gini(double pos, double n) {
    if (n <= 0) return 0.0;
    const double p = pos / n;
    return 2.0 * p * (1.0 - p);
  }

  std::vector<Node> nodes_;
};

/// Bootstrap sample of size n drawn with replacement.
inline std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed) {
  Rng rng(mix_seed(seed));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = uniform_int<std::size_t>(rng, 0, n - 1);
  return rows;
}

class RandomForest final : public Classifier {
 public:
  // Seeds used for tree t: bootstrap from tree_seed(seed, t, 0), splits from tree_seed(seed, t, 1).
  static std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree, std::uint64_t stream) {
    return derive_seed({seed, tree, stream});
  }

  static double resolve_feature_frac(const std::string& choice, std::size_t n_features) {
    if (choice == "sqrt")
      return n_features == 0 ? 1.0 : std::sqrt(static_cast<double>(n_features)) / static_cast<double>(n_features);
    return std::stod(choice);
  }

  static RandomForest fit(const Matrix& x, std::span<const int> y, std::int64_t trees, std::int64_t max_depth,
                          double feature_frac, std::uint64_t seed) {
    RandomForest f;
    const auto bins = FeatureBinner::fit(x);
    DecisionTree::Options opt{max_depth, 1, feature_frac};
    for (std::int64_t t = 0; t < trees; ++t) {
      auto rows = bootstrap_rows(x.rows(), tree_seed(seed, static_cast<std::size_t>(t), 0));
      f.trees_.push_back(DecisionTree::fit_rows(bins, y, std::move(rows), opt, tree_seed(seed, static_cast<std::size_t>(t), 1)));
    }
    return f;
  }

  std::vector<double> predict_scores(const Matrix& x) const override {
    std::vector<double> out(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = 0.0;
      for (const auto& t : trees_) s += t.score_row(x.row(i));
      out[i] = s / static_cast<double>(trees_.size());
    }
    return out;
  }

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

/// Gaussian naive Bayes; variances are widened by var_smoothing times the
/// largest feature variance.
class GaussianNB final : public Classifier {
 public:
  static GaussianNB fit(const Matrix& x, std::span<const int> y, double var_smoothing) {
    GaussianNB m;
    const auto d = x.cols();
    std::array<double, 2> count{};
    for (int c = 0; c < 2; ++c) {
      m.mean_[c].assign(d, 0.0);
      m.var_[c].assign(d, 0.0);
    }
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const int c = y[i] != 0;
      count[c] += 1.0;
      for (std::size_t j = 0; j < d; ++j) m.mean_[c][j] += x(i, j);
    }
    for (int c = 0; c < 2; ++c)
      for (auto& v : m.mean_[c]) v /= count[c];
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const int c = y[i] != 0;
      for (std::size_t j = 0; j < d; ++j) {
        const double dv = x(i, j) - m.mean_[c][j];
        m.var_[c][j] += dv * dv;
      }
    }
    // overall per-feature variance sets the smoothing scale
    double max_var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double mu = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < x.rows(); ++i) mu += x(i, j);
      mu /= static_cast<double>(x.rows());
      for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - mu) * (x(i, j) - mu);
      max_var = std::max(max_var, ss / static_cast<double>(x.rows()));
    }
    const double eps = std::max(var_smoothing * max_var, 1e-12);
    for (int c = 0; c < 2; ++c)
      for (auto& v : m.var_[c]) v = v / count[c] + eps;
    const double n = count[0] + count[1];
    m.log_prior_ = {std::log(count[0] / n), std::log(count[1] / n)};
    return m;
  }

  std::vector<double> predict_scores(const Matrix& x) const override {
    std::vector<double> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      std::array<double, 2> ll = log_prior_;
      for (int c = 0; c < 2; ++c) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
          const double dv = x(i, j) - mean_[c][j];
          ll[c] += -0.5 * std::log(2.0 * std::numbers::pi * var_[c][j]) - dv * dv / (2.0 * var_[c][j]);
        }
      }
      out[i] = sigmoid(ll[1] - ll[0]);
    }
    return out;
  }

 private:
  std::array<std::vector<double>, 2> mean_, var_;
  std::array<double, 2> log_prior_{};
};

/// k-NN over Euclidean distance. Rows tied with the k-th distance are all
/// included; with inverse-distance weights, exact matches take all the weight.
class KNearestNeighbors final : public Classifier {
 public:
  static KNearestNeighbors fit(const Matrix& x, std::span<const int> y, std::int64_t k, bool distance_weighted) {
    KNearestNeighbors m;
    m.x_ = x;
    m.y_.assign(y.begin(), y.end());
    m.k_ = static_cast<std::size_t>(std::max<std::int64_t>(1, k));
    m.distance_weighted_ = distance_weighted;
    return m;
  }

  std::vector<double> predict_scores(const Matrix& q) const override {
    std::vector<double> out(q.rows());
    const auto n = x_.rows();
    const auto k = std::min(k_, n);
    std::vector<double> dist(n), sorted(n);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      const auto qi = q.row(i);
      for (std::size_t r = 0; r < n; ++r) {
        const auto xr = x_.row(r);
        double s = 0.0;
        for (std::size_t j = 0; j < qi.size(); ++j) {
          const double d = qi[j] - xr[j];
          s += d * d;
        }
        dist[r] = s;
      }
      sorted = dist;
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
      const double kth = sorted[k - 1];
      double w_sum = 0.0, w_pos = 0.0;
      if (distance_weighted_ && std::any_of(dist.begin(), dist.end(), [](double d) { return d == 0.0; })) {
        for (std::size_t r = 0; r < n; ++r)
          if (dist[r] == 0.0) {
            w_sum += 1.0;
            w_pos += y_[r];
          }
      } else {
        for (std::size_t r = 0; r < n; ++r) {
          if (dist[r] > kth) continue;
          const double w = distance_weighted_ ? 1.0 / std::sqrt(dist[r]) : 1.0;
          w_sum += w;
          w_pos += w * y_[r];
        }
      }
      out[i] = w_pos / w_sum;
    }
    return out;
  }

 private:
  Matrix x_;
  std::vector<int> y_;
  std::size_t k_ = 1;
  bool distance_weighted_ = false;
};

struct TrainingMeta {
  std::size_t rows = 0;
  std::size_t features = 0;
  double wall_time_s = 0.0;
  bool converged = true;
};

/// Immutable trained model; cheap to copy and safe to share across threads.
class FittedModel {
 public:
  FittedModel(ModelId id, std::shared_ptr<const Classifier> impl, TrainingMeta meta)
      : id_(id), impl_(std::move(impl)), meta_(meta) {}

  ModelId id() const noexcept { return id_; }
  const TrainingMeta& meta() const noexcept { return meta_; }
  const Classifier& impl() const noexcept { return *impl_; }

  std::vector<double> predict_scores(const Matrix& x) const {
    if (x.cols() != meta_.features) throw ContractError("predict_scores: feature arity does not match training");
    auto s = impl_->predict_scores(x);
    for (auto& v : s) v = std::clamp(v, 0.0, 1.0);
    return s;
  }

 private:
  ModelId id_;
  std::shared_ptr<const Classifier> impl_;
  TrainingMeta meta_;
};

inline constexpr std::size_t kMinTrainingRows = 10;

inline FittedModel train(const ModelSpec& spec, const Matrix& x, std::span<const int> y, std::uint64_t seed) {
  if (x.rows() != y.size()) throw ContractError("train: X/y row mismatch");
  if (x.rows() < kMinTrainingRows) throw TrainingError("train: fewer than 10 training rows");
  const auto pos = std::count_if(y.begin(), y.end(), [](int v) { return v != 0; });
  if (pos == 0 || static_cast<std::size_t>(pos) == y.size()) throw TrainingError("train: single-class training set");

  const auto start = std::chrono::steady_clock::now();
  std::shared_ptr<const Classifier> impl;
  bool converged = true;
  switch (spec.id) {
    case ModelId::logistic_regression: {
      auto m = LogisticRegression::fit(x, y, spec.get_real("l2"), spec.get_int("epochs"), spec.get_real("lr"));
      converged = m.converged();
      impl = std::make_shared<LogisticRegression>(std::move(m));
      break;
    }
    case ModelId::decision_tree:
      impl = std::make_shared<DecisionTree>(DecisionTree::fit(
          x, y, {spec.get_int("max_depth"), spec.get_int("min_leaf"), 1.0}, seed));
      break;
    case ModelId::random_forest:
      impl = std::make_shared<RandomForest>(RandomForest::fit(
          x, y, spec.get_int("trees"), spec.get_int("max_depth"),
          RandomForest::resolve_feature_frac(spec.get_str("feature_frac"), x.cols()), seed));
      break;
    case ModelId::gaussian_nb:
      impl = std::make_shared<GaussianNB>(GaussianNB::fit(x, y, spec.get_real("var_smoothing")));
      break;
    case ModelId::knn:
      impl = std::make_shared<KNearestNeighbors>(
          KNearestNeighbors::fit(x, y, spec.get_int("k"), spec.get_str("weight") == "distance"));
      break;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return FittedModel(spec.id, std::move(impl), {x.rows(), x.cols(), secs, converged});
}

}  // namespace fairevo
