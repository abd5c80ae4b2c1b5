#pragma once

/// @file pipeline.hpp
/// Pipeline genomes (data-reduction mode, instance/feature selection,
/// model + hyperparameters), their genetic operators, and single-genome
/// evaluation into a FitnessReport.
///
/// Fitness (minimised, in [0,1]):
///   baseline:        performance_component
///   fairness_aware:  alpha * performance_component + (1 - alpha) * fairness_component

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairevo/data.hpp"
#include "fairevo/error.hpp"
#include "fairevo/fairness.hpp"
#include "fairevo/metrics.hpp"
#include "fairevo/models.hpp"
#include "fairevo/random.hpp"

namespace fairevo {

enum class DrMode { no_dr, only_is, only_fs, is_and_fs };

inline constexpr std::array<DrMode, 4> kAllDrModes = {DrMode::no_dr, DrMode::only_is, DrMode::only_fs,
                                                      DrMode::is_and_fs};

inline std::string to_string(DrMode m) {
  switch (m) {
    case DrMode::no_dr: return "NoDR";
    case DrMode::only_is: return "OnlyIS";
    case DrMode::only_fs: return "OnlyFS";
    case DrMode::is_and_fs: return "ISandFS";
  }
  return "unknown";
}

inline DrMode dr_mode_from_string(std::string_view s) {
  for (auto m : kAllDrModes)
    if (to_string(m) == s) return m;
  throw ContractError("unknown DR mode '" + std::string(s) + "'");
}

/// What a genome may range over for one dataset.
struct SearchSpace {
  std::vector<std::string> feature_names;  // original (pre-encoding) feature columns
  std::vector<bool> feature_sensitive;
  HyperparamSpace models = HyperparamSpace::defaults();
  double min_fraction = 0.1;
  double max_fraction = 1.0;

  std::size_t n_features() const noexcept { return feature_names.size(); }

  static SearchSpace for_dataset(const TabularDataset& ds) {
    SearchSpace s;
    for (auto c : ds.feature_columns()) {
      s.feature_names.push_back(ds.column(c).name);
      s.feature_sensitive.push_back(ds.column(c).is_sensitive);
    }
    return s;
  }
};

struct PipelineGenome {
  DrMode dr_mode = DrMode::no_dr;
  double instance_fraction = 1.0;
  std::uint64_t instance_seed = 0;
  std::vector<bool> feature_mask;
  ModelSpec model;

  bool uses_is() const noexcept { return dr_mode == DrMode::only_is || dr_mode == DrMode::is_and_fs; }
  bool uses_fs() const noexcept { return dr_mode == DrMode::only_fs || dr_mode == DrMode::is_and_fs; }

  double effective_fraction() const noexcept { return uses_is() ? instance_fraction : 1.0; }
  std::vector<bool> effective_mask() const {
    return uses_fs() ? feature_mask : std::vector<bool>(feature_mask.size(), true);
  }

  friend bool operator==(const PipelineGenome&, const PipelineGenome&) = default;
};

inline nlohmann::json hyper_to_json(const HyperValue& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

inline HyperValue hyper_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ContractError("hyperparameter value must be a number or string");
}

inline nlohmann::json to_json(const ModelSpec& m) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : m.params) params[k] = hyper_to_json(v);
  return {{"model", to_string(m.id)}, {"params", params}};
}

inline ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec m;
  m.id = model_id_from_string(j.at("model").get<std::string>());
  for (auto& [k, v] : j.at("params").items()) m.params[k] = hyper_from_json(v);
  return m;
}

inline nlohmann::json to_json(const PipelineGenome& g) {
  std::string mask;
  for (bool b : g.feature_mask) mask.push_back(b ? '1' : '0');
  return {{"dr_mode", to_string(g.dr_mode)},
          {"instance_fraction", g.instance_fraction},
          {"instance_seed", g.instance_seed},
          {"feature_mask", mask},
          {"model", to_json(g.model)}};
}

inline PipelineGenome genome_from_json(const nlohmann::json& j) {
  PipelineGenome g;
  g.dr_mode = dr_mode_from_string(j.at("dr_mode").get<std::string>());
  g.instance_fraction = j.at("instance_fraction").get<double>();
  g.instance_seed = j.at("instance_seed").get<std::uint64_t>();
  for (char c : j.at("feature_mask").get<std::string>()) {
    if (c != '0' && c != '1') throw ContractError("feature_mask must be a 0/1 string");
    g.feature_mask.push_back(c == '1');
  }
  g.model = model_spec_from_json(j.at("model"));
  return g;
}

/// Compact, canonical text record (keys sorted); used for persistence and
/// as the final tie-breaker in selection.
inline std::string serialize(const PipelineGenome& g) { return to_json(g).dump(); }

inline bool satisfies_invariants(const PipelineGenome& g, const SearchSpace& space) {
  return g.feature_mask.size() == space.n_features() &&
         std::any_of(g.feature_mask.begin(), g.feature_mask.end(), [](bool b) { return b; }) &&
         g.instance_fraction >= space.min_fraction && g.instance_fraction <= space.max_fraction &&
         space.models.contains(g.model);
}

// ---------------------------------------------------------------------------
// Genetic operators

namespace detail {

inline void repair_mask(std::vector<bool>& mask, Rng& rng) {
  if (mask.empty() || std::any_of(mask.begin(), mask.end(), [](bool b) { return b; })) return;
  mask[uniform_int<std::size_t>(rng, 0, mask.size() - 1)] = true;
}

inline DrMode sample_dr_mode(Rng& rng) { return kAllDrModes[uniform_int<std::size_t>(rng, 0, kAllDrModes.size() - 1)]; }

}  // namespace detail

inline PipelineGenome random_genome(Rng& rng, const SearchSpace& space) {
  PipelineGenome g;
  g.dr_mode = detail::sample_dr_mode(rng);
  g.instance_fraction = space.min_fraction + (space.max_fraction - space.min_fraction) * uniform01(rng);
  g.instance_seed = rng();
  g.feature_mask.resize(space.n_features());
  for (std::size_t i = 0; i < g.feature_mask.size(); ++i) g.feature_mask[i] = bernoulli(rng, 0.5);
  detail::repair_mask(g.feature_mask, rng);
  g.model = space.models.sample(rng);
  return g;
}

inline PipelineGenome random_genome(std::uint64_t seed, const SearchSpace& space) {
  Rng rng(mix_seed(seed));
  return random_genome(rng, space);
}

// dr_mode, instance fraction, instance seed, feature mask, model
inline constexpr std::size_t kGenomeGenes = 5;

/// Each gene changes independently with probability p_gene. The fraction
/// is jittered by up to ±0.1, mask bits flip with probability
/// p_gene / n_features, and a mutated model gene either draws a fresh model
/// or redraws every hyperparameter of the current one.
inline PipelineGenome mutate(const PipelineGenome& g, Rng& rng, double p_gene, const SearchSpace& space) {
  if (!(p_gene >= 0.0 && p_gene <= 1.0)) throw ContractError("mutate: p_gene outside [0,1]");
  PipelineGenome out = g;
  if (bernoulli(rng, p_gene)) out.dr_mode = detail::sample_dr_mode(rng);
  if (bernoulli(rng, p_gene)) {
    const double jitter = -0.1 + 0.2 * uniform01(rng);
    out.instance_fraction = std::clamp(out.instance_fraction + jitter, space.min_fraction, space.max_fraction);
  }
  if (bernoulli(rng, p_gene)) out.instance_seed = rng();
  if (!out.feature_mask.empty()) {
    const double p_bit = p_gene / static_cast<double>(out.feature_mask.size());
    for (std::size_t i = 0; i < out.feature_mask.size(); ++i)
      if (bernoulli(rng, p_bit)) out.feature_mask[i] = !out.feature_mask[i];
  }
  if (bernoulli(rng, p_gene)) {
    if (bernoulli(rng, 0.5)) {
      out.model = space.models.sample(rng);
    } else {
      for (const auto& p : space.models.params(out.model.id)) space.models.resample_param(out.model, p.name, rng);
    }
  }
  detail::repair_mask(out.feature_mask, rng);
  return out;
}

/// Uniform crossover: every gene (and every mask bit) comes from one parent
/// and the sibling takes the other. Models of the same family are crossed
/// per hyperparameter.
inline std::pair<PipelineGenome, PipelineGenome> crossover(const PipelineGenome& a, const PipelineGenome& b, Rng& rng) {
  if (a.feature_mask.size() != b.feature_mask.size()) throw ContractError("crossover: mask length mismatch");
  PipelineGenome c1 = a, c2 = b;
  if (bernoulli(rng, 0.5)) std::swap(c1.dr_mode, c2.dr_mode);
  if (bernoulli(rng, 0.5)) std::swap(c1.instance_fraction, c2.instance_fraction);
  if (bernoulli(rng, 0.5)) std::swap(c1.instance_seed, c2.instance_seed);
  for (std::size_t i = 0; i < c1.feature_mask.size(); ++i) {
    if (bernoulli(rng, 0.5)) {
      const bool t = c1.feature_mask[i];
      c1.feature_mask[i] = c2.feature_mask[i];
      c2.feature_mask[i] = t;
    }
  }
  if (a.model.id == b.model.id) {
    for (auto& [name, v] : c1.model.params)
      if (bernoulli(rng, 0.5)) std::swap(v, c2.model.params.at(name));
  } else if (bernoulli(rng, 0.5)) {
    std::swap(c1.model, c2.model);
  }
  detail::repair_mask(c1.feature_mask, rng);
  detail::repair_mask(c2.feature_mask, rng);
  return {std::move(c1), std::move(c2)};
}

// ---------------------------------------------------------------------------
// Selection and evaluation

struct Selection {
  std::vector<std::size_t> rows;     // dataset rows kept for training
  std::vector<std::size_t> columns;  // dataset column indices kept as features
};

/// IS keeps a label-stratified ceil(fraction * n) subsample drawn with the
/// genome's instance seed; FS keeps whole original columns.
inline Selection apply_selection(const PipelineGenome& g, const TabularDataset& ds, std::span<const std::size_t> train_rows) {
  if (g.feature_mask.size() != ds.n_features()) throw ContractError("apply_selection: mask length != feature count");
  Selection sel;
  if (g.uses_is()) {
    const double exact = g.instance_fraction * static_cast<double>(train_rows.size());
    auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    count = std::clamp<std::size_t>(count, 1, train_rows.size());
    sel.rows = stratified_sample(ds.labels(), train_rows, count, g.instance_seed);
  } else {
    sel.rows.assign(train_rows.begin(), train_rows.end());
  }
  const auto mask = g.effective_mask();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) sel.columns.push_back(ds.feature_columns()[i]);
  if (sel.columns.empty()) throw SelectionError("selection keeps no features");

  std::size_t pos = 0;
  for (auto r : sel.rows) pos += ds.labels()[r] == 1;
  if (pos == 0 || pos == sel.rows.size()) throw SelectionError("selected training rows contain a single class");
  return sel;
}

enum class FitnessMode { baseline, fairness_aware };

inline std::string to_string(FitnessMode m) { return m == FitnessMode::baseline ? "baseline" : "fairness_aware"; }

inline FitnessMode fitness_mode_from_string(std::string_view s) {
  if (s == "baseline") return FitnessMode::baseline;
  if (s == "fairness_aware" || s == "fair") return FitnessMode::fairness_aware;
  throw ConfigError("unknown fitness mode '" + std::string(s) + "'");
}

struct FitnessConfig {
  double alpha = 0.8;
  FitnessMode mode = FitnessMode::fairness_aware;
};

inline double combine_fitness(double performance, double fairness, const FitnessConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ContractError("fitness: alpha outside [0,1]");
  if (cfg.mode == FitnessMode::baseline) return performance;
  return cfg.alpha * performance + (1.0 - cfg.alpha) * fairness;
}

inline constexpr double kWorstFitness = 1.0;

struct FitnessReport {
  FairnessBundle fairness;
  PerformanceBundle performance;
  double fitness = kWorstFitness;
  double instances_frac = 0.0;
  double features_frac = 0.0;
  double positive_pct = 0.0;
  double sensitives_pct = 0.0;
  double eval_wall_time = 0.0;
  std::size_t selected_rows = 0;
  bool error = false;
  std::string error_message;

  double data_usage() const noexcept { return instances_frac + features_frac; }
};

/// Equality on every field except wall time.
inline bool same_outcome(const FitnessReport& a, const FitnessReport& b) {
  return a.fairness == b.fairness && a.performance == b.performance && a.fitness == b.fitness &&
         a.instances_frac == b.instances_frac && a.features_frac == b.features_frac &&
         a.positive_pct == b.positive_pct && a.sensitives_pct == b.sensitives_pct &&
         a.selected_rows == b.selected_rows && a.error == b.error && a.error_message == b.error_message;
}

inline nlohmann::json to_json(const FitnessReport& r) {
  return {{"dp", r.fairness.dp},
          {"eo", r.fairness.eo},
          {"abroca", r.fairness.abroca},
          {"fairness_component", r.fairness.fairness_component},
          {"evaluated_groups", r.fairness.evaluated_groups},
          {"mcc", r.performance.mcc},
          {"nmcc", r.performance.nmcc},
          {"tpr", r.performance.tpr},
          {"f1", r.performance.f1},
          {"aucroc", r.performance.aucroc},
          {"performance_component", r.performance.performance_component},
          {"fitness", r.fitness},
          {"instances_frac", r.instances_frac},
          {"features_frac", r.features_frac},
          {"positive_pct", r.positive_pct},
          {"sensitives_pct", r.sensitives_pct},
          {"eval_wall_time", r.eval_wall_time},
          {"selected_rows", r.selected_rows},
          {"error", r.error},
          {"error_message", r.error_message}};
}

inline FitnessReport fitness_report_from_json(const nlohmann::json& j) {
  FitnessReport r;
  r.fairness.dp = j.at("dp").get<double>();
  r.fairness.eo = j.at("eo").get<double>();
  r.fairness.abroca = j.at("abroca").get<double>();
  r.fairness.fairness_component = j.at("fairness_component").get<double>();
  r.fairness.evaluated_groups = j.at("evaluated_groups").get<std::size_t>();
  r.performance.mcc = j.at("mcc").get<double>();
  r.performance.nmcc = j.at("nmcc").get<double>();
  r.performance.tpr = j.at("tpr").get<double>();
  r.performance.f1 = j.at("f1").get<double>();
  r.performance.aucroc = j.at("aucroc").get<double>();
  r.performance.performance_component = j.at("performance_component").get<double>();
  r.fitness = j.at("fitness").get<double>();
  r.instances_frac = j.at("instances_frac").get<double>();
  r.features_frac = j.at("features_frac").get<double>();
  r.positive_pct = j.at("positive_pct").get<double>();
  r.sensitives_pct = j.at("sensitives_pct").get<double>();
  r.eval_wall_time = j.at("eval_wall_time").get<double>();
  r.selected_rows = j.at("selected_rows").get<std::size_t>();
  r.error = j.at("error").get<bool>();
  r.error_message = j.at("error_message").get<std::string>();
  return r;
}

/// A trained pipeline: selection, encoder fitted on the selected rows, model.
struct FittedPipeline {
  Selection selection;
  Encoder encoder;
  FittedModel model;

  std::vector<double> score(const TabularDataset& ds, std::span<const std::size_t> rows) const {
    return model.predict_scores(encoder.transform(ds, rows).features);
  }
};

inline FittedPipeline fit_pipeline(const PipelineGenome& g, const TabularDataset& ds,
                                   std::span<const std::size_t> train_rows, std::uint64_t seed) {
  auto sel = apply_selection(g, ds, train_rows);
  auto enc = Encoder::fit(ds, sel.rows, sel.columns);
  auto train_m = enc.transform(ds, sel.rows);
  auto model = train(g.model, train_m.features, train_m.labels, seed);
  return {std::move(sel), std::move(enc), std::move(model)};
}

/// Fills the data-usage fields from a selection.
inline void account_selection(FitnessReport& r, const Selection& sel, const TabularDataset& ds,
                              std::size_t n_train_rows) {
  r.selected_rows = sel.rows.size();
  r.instances_frac = static_cast<double>(sel.rows.size()) / static_cast<double>(n_train_rows);
  r.features_frac = static_cast<double>(sel.columns.size()) / static_cast<double>(ds.n_features());
  std::size_t pos = 0;
  for (auto row : sel.rows) pos += ds.labels()[row] == 1;
  r.positive_pct = 100.0 * static_cast<double>(pos) / static_cast<double>(sel.rows.size());
  const auto n_sens = std::count_if(sel.columns.begin(), sel.columns.end(),
                                    [&](std::size_t c) { return ds.column(c).is_sensitive; });
  r.sensitives_pct = 100.0 * static_cast<double>(n_sens) / static_cast<double>(sel.columns.size());
}

/// Trains the genome on `train_rows` and scores `eval_rows`. Subgroups are
/// built over the evaluated rows. Selection or training failures produce a
/// report with fitness 1 and the error flag set.
inline FitnessReport evaluate(const PipelineGenome& g, const TabularDataset& ds, std::span<const std::size_t> train_rows,
                              std::span<const std::size_t> eval_rows, const FitnessConfig& cfg, std::uint64_t seed,
                              const FairnessOptions& fopt = {}) {
  const auto start = std::chrono::steady_clock::now();
  FitnessReport r;
  try {
    auto fitted = fit_pipeline(g, ds, train_rows, seed);
    account_selection(r, fitted.selection, ds, train_rows.size());
    const auto scores = fitted.score(ds, eval_rows);
    std::vector<int> labels;
    labels.reserve(eval_rows.size());
    for (auto row : eval_rows) labels.push_back(ds.labels()[row]);
    r.performance = evaluate_performance(scores, labels);
    const auto sg = build_subgroups(ds, eval_rows);
    r.fairness = evaluate_fairness(scores, labels, sg, fopt);
    r.fitness = combine_fitness(r.performance.performance_component, r.fairness.fairness_component, cfg);
  } catch (const SelectionError& e) {
    r.error = true;
    r.error_message = std::string("selection: ") + e.what();
    r.fitness = kWorstFitness;
  } catch (const TrainingError& e) {
    r.error = true;
    r.error_message = std::string("training: ") + e.what();
    r.fitness = kWorstFitness;
  }
  r.eval_wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace fairevo
