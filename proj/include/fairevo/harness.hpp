#pragma once

/// @file harness.hpp
/// Experiment protocol: seeds x stratified outer folds x setups, an inner
/// stratified train/validation split for the search, refit of the winning
/// genome on the outer-train data and scoring on the untouched test fold.
/// Every run is persisted so aggregates can be rebuilt from disk.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fairevo/data.hpp"
#include "fairevo/error.hpp"
#include "fairevo/fairness.hpp"
#include "fairevo/pipeline.hpp"
#include "fairevo/search.hpp"
#include "fairevo/stats.hpp"

namespace fairevo {

inline std::string setup_name(FitnessMode m) { return m == FitnessMode::baseline ? "baseline" : "fair"; }

inline FitnessMode setup_from_name(std::string_view s) {
  if (s == "baseline") return FitnessMode::baseline;
  if (s == "fair" || s == "fairness_aware") return FitnessMode::fairness_aware;
  throw ConfigError("unknown setup '" + std::string(s) + "'");
}

struct ExperimentPlan {
  std::string dataset_id = "dataset";
  std::size_t k_folds = 5;
  std::size_t n_seeds = 30;
  std::uint64_t seed_base = 0;  // run i uses seed seed_base + i
  std::vector<FitnessMode> setups = {FitnessMode::baseline, FitnessMode::fairness_aware};
  SearchConfig search;  // template; seed and fitness mode are set per run
  double validation_fraction = 0.25;
  std::size_t max_concurrent_runs = 1;
  FairnessOptions fairness;
  std::filesystem::path out_dir;  // empty: keep results in memory only
};

/// Least-represented category of a sensitive attribute in the full dataset.
struct SensitiveCategory {
  std::string attribute;
  std::string category;
  double original = 0.0;
};

struct ExperimentMeta {
  std::string dataset_id;
  std::size_t n_rows = 0;
  std::size_t k_folds = 0;
  std::size_t n_seeds = 0;
  std::uint64_t seed_base = 0;
  std::vector<FitnessMode> setups;
  double alpha = 0.8;
  std::vector<std::string> feature_names;
  std::vector<bool> feature_sensitive;
  std::vector<SensitiveCategory> sensitive_categories;
};

struct RunRecord {
  std::size_t seed_index = 0;
  std::uint64_t run_seed = 0;
  std::size_t fold = 0;
  FitnessMode setup = FitnessMode::baseline;
  bool ok = false;
  std::string error;
  PipelineGenome genome;
  FitnessReport validation_report;  // best individual's fitness during search
  FitnessReport test_report;        // refit on outer train, scored on the test fold
  std::vector<GenerationTrace> trace;
  bool truncated = false;
  std::size_t evaluations = 0;
  double elapsed_s = 0.0;
  // attribute -> share of its least-represented category among the selected
  // training rows; only for attributes kept by the feature mask
  std::map<std::string, double> sensitive_props;
};

struct FoldRecord {
  std::size_t seed_index = 0;
  FoldPlan plan;
  std::vector<std::vector<std::size_t>> validation_rows;  // per fold
  std::vector<std::vector<std::size_t>> search_train_rows;  // per fold
};

struct ExperimentResult {
  ExperimentMeta meta;
  std::vector<RunRecord> runs;  // ordered by (seed, fold, setup)
  std::vector<FoldRecord> folds;

  std::vector<const RunRecord*> completed(FitnessMode setup) const {
    std::vector<const RunRecord*> out;
    for (const auto& r : runs)
      if (r.setup == setup && r.ok) out.push_back(&r);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Serialization of run artifacts

inline nlohmann::json to_json(const ExperimentMeta& m) {
  nlohmann::json setups = nlohmann::json::array();
  for (auto s : m.setups) setups.push_back(setup_name(s));
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : m.sensitive_categories)
    cats.push_back({{"attribute", c.attribute}, {"category", c.category}, {"original", c.original}});
  return {{"dataset_id", m.dataset_id}, {"n_rows", m.n_rows},           {"k_folds", m.k_folds},
          {"n_seeds", m.n_seeds},       {"seed_base", m.seed_base},     {"setups", setups},
          {"alpha", m.alpha},           {"feature_names", m.feature_names}, {"feature_sensitive", m.feature_sensitive},
          {"sensitive_categories", cats}};
}

inline ExperimentMeta meta_from_json(const nlohmann::json& j) {
  ExperimentMeta m;
  m.dataset_id = j.at("dataset_id").get<std::string>();
  m.n_rows = j.at("n_rows").get<std::size_t>();
  m.k_folds = j.at("k_folds").get<std::size_t>();
  m.n_seeds = j.at("n_seeds").get<std::size_t>();
  m.seed_base = j.at("seed_base").get<std::uint64_t>();
  for (const auto& s : j.at("setups")) m.setups.push_back(setup_from_name(s.get<std::string>()));
  m.alpha = j.at("alpha").get<double>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.feature_sensitive = j.at("feature_sensitive").get<std::vector<bool>>();
  for (const auto& c : j.at("sensitive_categories"))
    m.sensitive_categories.push_back(
        {c.at("attribute").get<std::string>(), c.at("category").get<std::string>(), c.at("original").get<double>()});
  return m;
}

inline std::string run_dir_name(const RunRecord& r) {
  return "seed" + std::to_string(r.seed_index) + "_fold" + std::to_string(r.fold) + "_" + setup_name(r.setup);
}

inline nlohmann::json run_summary_json(const RunRecord& r) {
  return {{"seed_index", r.seed_index},
          {"run_seed", r.run_seed},
          {"fold", r.fold},
          {"setup", setup_name(r.setup)},
          {"ok", r.ok},
          {"error", r.error},
          {"validation_report", to_json(r.validation_report)},
          {"test_report", to_json(r.test_report)},
          {"truncated", r.truncated},
          {"evaluations", r.evaluations},
          {"elapsed_s", r.elapsed_s},
          {"sensitive_props", r.sensitive_props}};
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw IoError("cannot read " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt record " + p.string() + ": " + e.what());
  }
}

}  // namespace detail

/// Writes genome.json, report.json and trace.jsonl into runs/<name>/.
inline void persist_run(const RunRecord& r, const std::filesystem::path& out_dir) {
  const auto dir = out_dir / "runs" / run_dir_name(r);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  detail::write_text(dir / "genome.json", (r.ok ? to_json(r.genome) : nlohmann::json(nullptr)).dump(2) + "\n");
  detail::write_text(dir / "report.json", run_summary_json(r).dump(2) + "\n");
  std::string lines;
  for (const auto& t : r.trace) lines += to_json(t).dump() + "\n";
  detail::write_text(dir / "trace.jsonl", lines);
}

inline RunRecord load_run(const std::filesystem::path& dir) {
  RunRecord r;
  const auto report_path = dir / "report.json";
  const auto j = detail::read_json(report_path);
  try {
    r.seed_index = j.at("seed_index").get<std::size_t>();
    r.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.fold = j.at("fold").get<std::size_t>();
    r.setup = setup_from_name(j.at("setup").get<std::string>());
    r.ok = j.at("ok").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.validation_report = fitness_report_from_json(j.at("validation_report"));
    r.test_report = fitness_report_from_json(j.at("test_report"));
    r.truncated = j.at("truncated").get<bool>();
    r.evaluations = j.at("evaluations").get<std::size_t>();
    r.elapsed_s = j.at("elapsed_s").get<double>();
    r.sensitive_props = j.at("sensitive_props").get<std::map<std::string, double>>();
  } catch (const std::exception& e) {
    throw IoError("corrupt record " + report_path.string() + ": " + e.what());
  }
  const auto genome_path = dir / "genome.json";
  const auto g = detail::read_json(genome_path);
  try {
    if (r.ok) r.genome = genome_from_json(g);
  } catch (const std::exception& e) {
    throw IoError("corrupt record " + genome_path.string() + ": " + e.what());
  }
  const auto trace_path = dir / "trace.jsonl";
  std::ifstream in(trace_path);
  if (!in) throw IoError("cannot read " + trace_path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      r.trace.push_back(trace_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw IoError("corrupt record " + trace_path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return r;
}

inline nlohmann::json to_json(const FoldRecord& f) {
  return {{"seed_index", f.seed_index},
          {"seed", f.plan.seed},
          {"k", f.plan.k},
          {"assignments", f.plan.assignments},
          {"validation_rows", f.validation_rows},
          {"search_train_rows", f.search_train_rows}};
}

inline FoldRecord fold_record_from_json(const nlohmann::json& j) {
  FoldRecord f;
  f.seed_index = j.at("seed_index").get<std::size_t>();
  f.plan.seed = j.at("seed").get<std::uint64_t>();
  f.plan.k = j.at("k").get<std::size_t>();
  f.plan.assignments = j.at("assignments").get<std::vector<int>>();
  f.validation_rows = j.at("validation_rows").get<std::vector<std::vector<std::size_t>>>();
  f.search_train_rows = j.at("search_train_rows").get<std::vector<std::vector<std::size_t>>>();
  return f;
}

/// Reads experiment.json, folds/ and runs/ back into memory.
inline ExperimentResult load_experiment(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("artifact directory not found: " + dir.string());
  ExperimentResult res;
  const auto meta_path = dir / "experiment.json";
  try {
    res.meta = meta_from_json(detail::read_json(meta_path));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError("corrupt record " + meta_path.string() + ": " + e.what());
  }
  const auto folds_dir = dir / "folds";
  if (std::filesystem::is_directory(folds_dir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(folds_dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) {
      try {
        res.folds.push_back(fold_record_from_json(detail::read_json(p)));
      } catch (const IoError&) {
        throw;
      } catch (const std::exception& e) {
        throw IoError("corrupt record " + p.string() + ": " + e.what());
      }
    }
    std::sort(res.folds.begin(), res.folds.end(),
              [](const FoldRecord& a, const FoldRecord& b) { return a.seed_index < b.seed_index; });
  }
  const auto runs_dir = dir / "runs";
  if (std::filesystem::is_directory(runs_dir)) {
    for (const auto& e : std::filesystem::directory_iterator(runs_dir))
      if (e.is_directory()) res.runs.push_back(load_run(e.path()));
  }
  std::sort(res.runs.begin(), res.runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.seed_index, a.fold, a.setup) < std::tie(b.seed_index, b.fold, b.setup);
  });
  return res;
}

// ---------------------------------------------------------------------------
// Running

/// Label-stratified subsample of a dataset (rows keep their original order).
inline TabularDataset subsample(const TabularDataset& ds, std::size_t n_rows, std::uint64_t seed) {
  if (n_rows >= ds.n_rows()) return ds;
  std::vector<std::size_t> all(ds.n_rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return ds.select_rows(stratified_sample(ds.labels(), all, n_rows, seed));
}

inline std::string cell_token(const Cell& v) {
  if (is_missing(v)) return kMissingCategory;
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  return std::to_string(std::get<double>(v));
}

inline std::vector<SensitiveCategory> least_represented_categories(const TabularDataset& ds) {
  std::vector<SensitiveCategory> out;
  for (auto c : ds.sensitive_columns()) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) ++counts[cell_token(ds.cell(r, c))];
    auto it = std::min_element(counts.begin(), counts.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
    out.push_back({ds.column(c).name, it->first,
                   static_cast<double>(it->second) / static_cast<double>(ds.n_rows())});
  }
  return out;
}

inline ExperimentMeta make_meta(const TabularDataset& ds, const ExperimentPlan& plan) {
  ExperimentMeta m;
  m.dataset_id = plan.dataset_id;
  m.n_rows = ds.n_rows();
  m.k_folds = plan.k_folds;
  m.n_seeds = plan.n_seeds;
  m.seed_base = plan.seed_base;
  m.setups = plan.setups;
  m.alpha = plan.search.fitness.alpha;
  const auto space = SearchSpace::for_dataset(ds);
  m.feature_names = space.feature_names;
  m.feature_sensitive = space.feature_sensitive;
  m.sensitive_categories = least_represented_categories(ds);
  return m;
}

/// Search seed for (run seed, fold); identical for both setups so their
/// initial populations coincide.
inline std::uint64_t search_seed(std::uint64_t run_seed, std::size_t fold) { return derive_seed({run_seed, fold, 2}); }
inline std::uint64_t refit_seed(std::uint64_t run_seed, std::size_t fold) { return derive_seed({run_seed, fold, 3}); }
inline std::uint64_t inner_split_seed(std::uint64_t run_seed, std::size_t fold) { return derive_seed({run_seed, fold, 1}); }

inline void emit_reports(const ExperimentResult& result, const std::filesystem::path& out_dir);

using RunCallback = std::function<void(const RunRecord&)>;

inline ExperimentResult run_experiment(const TabularDataset& ds, const ExperimentPlan& plan,
                                       const RunCallback& on_run = {}) {
  if (plan.k_folds < 2) throw ConfigError("k_folds must be >= 2");
  if (plan.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  if (plan.setups.empty()) throw ConfigError("no setups selected");
  if (ds.sensitive_columns().empty()) throw ConfigError("dataset declares no sensitive attributes");
  plan.search.validate();

  ExperimentResult res;
  res.meta = make_meta(ds, plan);
  const auto space = SearchSpace::for_dataset(ds);
  const bool persist = !plan.out_dir.empty();
  if (persist) {
    std::error_code ec;
    std::filesystem::create_directories(plan.out_dir / "folds", ec);
    if (ec) throw IoError("cannot create " + plan.out_dir.string() + ": " + ec.message());
    detail::write_text(plan.out_dir / "experiment.json", to_json(res.meta).dump(2) + "\n");
  }

  struct Task {
    std::size_t seed_index;
    std::size_t fold;
    FitnessMode setup;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < plan.n_seeds; ++s) {
    const std::uint64_t run_seed = plan.seed_base + s;
    FoldRecord fr;
    fr.seed_index = s;
    fr.plan = stratified_kfold(ds, plan.k_folds, run_seed);
    for (std::size_t f = 0; f < plan.k_folds; ++f) {
      const auto outer_train = fr.plan.train_rows(f);
      auto split = train_validation_split(ds.labels(), outer_train, plan.validation_fraction, inner_split_seed(run_seed, f));
      fr.search_train_rows.push_back(std::move(split.train));
      fr.validation_rows.push_back(std::move(split.validation));
      for (auto setup : plan.setups) tasks.push_back({s, f, setup});
    }
    if (persist)
      detail::write_text(plan.out_dir / "folds" / ("seed" + std::to_string(s) + ".json"), to_json(fr).dump() + "\n");
    res.folds.push_back(std::move(fr));
  }

  res.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex callback_mutex;
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const auto& t = tasks[i];
      const auto& fr = res.folds[t.seed_index];
      RunRecord rec;
      rec.seed_index = t.seed_index;
      rec.run_seed = plan.seed_base + t.seed_index;
      rec.fold = t.fold;
      rec.setup = t.setup;
      try {
        SearchConfig cfg = plan.search;
        cfg.seed = search_seed(rec.run_seed, t.fold);
        cfg.fitness.mode = t.setup;
        const SearchData data{ds, fr.search_train_rows[t.fold], fr.validation_rows[t.fold], plan.fairness};
        auto sr = evolve(cfg, data, space);
        rec.genome = sr.best_genome;
        rec.validation_report = sr.best_report;
        rec.trace = std::move(sr.trace);
        rec.truncated = sr.truncated;
        rec.evaluations = sr.evaluations;
        rec.elapsed_s = sr.elapsed_s;

        const auto outer_train = fr.plan.train_rows(t.fold);
        const auto test = fr.plan.test_rows(t.fold);
        rec.test_report = evaluate(rec.genome, ds, outer_train, test, cfg.fitness, refit_seed(rec.run_seed, t.fold),
                                   plan.fairness);
        if (rec.test_report.error) throw Error("refit failed: " + rec.test_report.error_message);

        const auto sel = apply_selection(rec.genome, ds, outer_train);
        for (const auto& cat : res.meta.sensitive_categories) {
          const auto col = *ds.column_index(cat.attribute);
          if (std::find(sel.columns.begin(), sel.columns.end(), col) == sel.columns.end()) continue;
          std::size_t hits = 0;
          for (auto r : sel.rows) hits += cell_token(ds.cell(r, col)) == cat.category;
          rec.sensitive_props[cat.attribute] = static_cast<double>(hits) / static_cast<double>(sel.rows.size());
        }
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      if (persist) persist_run(rec, plan.out_dir);
      if (on_run) {
        std::lock_guard lock(callback_mutex);
        on_run(rec);
      }
      res.runs[i] = std::move(rec);
    }
  };
  const auto n_threads = std::max<std::size_t>(1, std::min(plan.max_concurrent_runs, tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }
  if (persist) emit_reports(res, plan.out_dir);
  return res;
}

// ---------------------------------------------------------------------------
// Aggregation and report emission

enum class Metric { dp, eo, abroca, mcc, tpr, aucroc, f1, instances, features, positive, sensitives };

inline constexpr std::array<Metric, 11> kTableMetrics = {Metric::dp,        Metric::eo,       Metric::abroca,
                                                         Metric::mcc,       Metric::tpr,      Metric::aucroc,
                                                         Metric::f1,        Metric::instances, Metric::features,
                                                         Metric::positive,  Metric::sensitives};

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::dp: return "DP";
    case Metric::eo: return "EO";
    case Metric::abroca: return "ABROCA";
    case Metric::mcc: return "MCC";
    case Metric::tpr: return "TPR";
    case Metric::aucroc: return "AUCROC";
    case Metric::f1: return "F1";
    case Metric::instances: return "Instances";
    case Metric::features: return "Features";
    case Metric::positive: return "Positive%";
    case Metric::sensitives: return "%Sensitives";
  }
  return "?";
}

inline double metric_value(const FitnessReport& r, Metric m) {
  switch (m) {
    case Metric::dp: return r.fairness.dp;
    case Metric::eo: return r.fairness.eo;
    case Metric::abroca: return r.fairness.abroca;
    case Metric::mcc: return r.performance.mcc;
    case Metric::tpr: return r.performance.tpr;
    case Metric::aucroc: return r.performance.aucroc;
    case Metric::f1: return r.performance.f1;
    case Metric::instances: return r.instances_frac;
    case Metric::features: return r.features_frac;
    case Metric::positive: return r.positive_pct;
    case Metric::sensitives: return r.sensitives_pct;
  }
  return 0.0;
}

enum class Aggregation { fold_average, best_of_run };

inline std::string to_string(Aggregation a) { return a == Aggregation::fold_average ? "avg_folds" : "best_of_run"; }

/// Per-seed samples of one metric: the mean over completed folds, or the
/// test value of the fold whose search reached the lowest validation fitness.
inline std::map<std::size_t, double> per_seed_values(const ExperimentResult& res, FitnessMode setup, Metric m,
                                                     Aggregation agg) {
  std::map<std::size_t, std::vector<const RunRecord*>> by_seed;
  for (const auto* r : res.completed(setup)) by_seed[r->seed_index].push_back(r);
  std::map<std::size_t, double> out;
  for (const auto& [seed, runs] : by_seed) {
    if (agg == Aggregation::fold_average) {
      double s = 0.0;
      for (const auto* r : runs) s += metric_value(r->test_report, m);
      out[seed] = s / static_cast<double>(runs.size());
    } else {
      const auto* best = *std::min_element(runs.begin(), runs.end(), [](const RunRecord* a, const RunRecord* b) {
        if (a->validation_report.fitness != b->validation_report.fitness)
          return a->validation_report.fitness < b->validation_report.fitness;
        return a->fold < b->fold;
      });
      out[seed] = metric_value(best->test_report, m);
    }
  }
  return out;
}

struct MetricSummary {
  Metric metric = Metric::dp;
  Aggregation aggregation = Aggregation::fold_average;
  std::optional<double> baseline_mean, baseline_std, fair_mean, fair_std, pct_change;
  std::optional<stats::Verdict> verdict;  // empty with fewer than 5 paired seeds
  bool complete = false;
};

inline bool setup_complete(const ExperimentResult& res, FitnessMode setup) {
  return res.completed(setup).size() == res.meta.n_seeds * res.meta.k_folds;
}

inline std::vector<MetricSummary> summarize(const ExperimentResult& res, Aggregation agg) {
  const bool has_base = std::count(res.meta.setups.begin(), res.meta.setups.end(), FitnessMode::baseline) > 0;
  const bool has_fair = std::count(res.meta.setups.begin(), res.meta.setups.end(), FitnessMode::fairness_aware) > 0;
  const bool complete = (!has_base || setup_complete(res, FitnessMode::baseline)) &&
                        (!has_fair || setup_complete(res, FitnessMode::fairness_aware));
  std::vector<MetricSummary> out;
  for (auto m : kTableMetrics) {
    MetricSummary s;
    s.metric = m;
    s.aggregation = agg;
    s.complete = complete;
    const auto base = has_base ? per_seed_values(res, FitnessMode::baseline, m, agg) : std::map<std::size_t, double>{};
    const auto fair = has_fair ? per_seed_values(res, FitnessMode::fairness_aware, m, agg) : std::map<std::size_t, double>{};
    auto values = [](const std::map<std::size_t, double>& mp) {
      std::vector<double> v;
      for (const auto& [_, x] : mp) v.push_back(x);
      return v;
    };
    const auto bv = values(base), fv = values(fair);
    if (!bv.empty()) {
      s.baseline_mean = stats::mean(bv);
      s.baseline_std = stats::stddev(bv);
    }
    if (!fv.empty()) {
      s.fair_mean = stats::mean(fv);
      s.fair_std = stats::stddev(fv);
    }
    if (s.baseline_mean && s.fair_mean) s.pct_change = stats::pct_change(*s.baseline_mean, *s.fair_mean);
    std::vector<double> pb, pf;
    for (const auto& [seed, x] : base) {
      auto it = fair.find(seed);
      if (it == fair.end()) continue;
      pb.push_back(x);
      pf.push_back(it->second);
    }
    if (pb.size() >= stats::kMinPairedSamples) s.verdict = stats::significance(pb, pf, kTableMetrics.size());
    out.push_back(std::move(s));
  }
  return out;
}

inline const std::string kNullMarker = "null";

/// Six significant digits.
inline std::string fmt6(double v) {
  if (!std::isfinite(v)) return kNullMarker;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fmt6(const std::optional<double>& v) { return v ? fmt6(*v) : kNullMarker; }

/// Fairness mean and performance mean of one solution as plotted in the
/// trade-off scatter: (DP+EO+ABROCA)/3 and ((MCC+1)/2 + TPR)/2.
inline double solution_fairness_mean(const FitnessReport& r) {
  return (r.fairness.dp + r.fairness.eo + r.fairness.abroca) / 3.0;
}
inline double solution_performance_mean(const FitnessReport& r) {
  return ((r.performance.mcc + 1.0) / 2.0 + r.performance.tpr) / 2.0;
}

struct EvolutionRow {
  std::size_t generation = 0;
  double best_fitness = 0, mean_fitness = 0, mcc = 0, tpr = 0, dp = 0, eo = 0, abroca = 0;
  double fairness_component = 0, performance_component = 0;
};

/// Per-generation averages over a setup's runs, cut to the shortest trace.
inline std::vector<EvolutionRow> evolution_means(const ExperimentResult& res, FitnessMode setup) {
  const auto runs = res.completed(setup);
  if (runs.empty()) return {};
  std::size_t len = std::numeric_limits<std::size_t>::max();
  for (const auto* r : runs) len = std::min(len, r->trace.size());
  std::vector<EvolutionRow> rows(len);
  const double n = static_cast<double>(runs.size());
  for (std::size_t g = 0; g < len; ++g) {
    auto& row = rows[g];
    row.generation = g;
    for (const auto* r : runs) {
      const auto& t = r->trace[g];
      row.best_fitness += t.best.fitness / n;
      row.mean_fitness += t.mean_fitness / n;
      row.mcc += t.best.performance.mcc / n;
      row.tpr += t.best.performance.tpr / n;
      row.dp += t.best.fairness.dp / n;
      row.eo += t.best.fairness.eo / n;
      row.abroca += t.best.fairness.abroca / n;
      row.fairness_component += t.best.fairness.fairness_component / n;
      row.performance_component += t.best.performance.performance_component / n;
    }
  }
  return rows;
}

/// table4.csv, scatter.csv, dr_modes.csv, features.csv, models.csv,
/// evolution.csv, sensitive_props.csv. Output depends only on `result`.
inline void emit_reports(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create " + out_dir.string());
  const auto& setups = result.meta.setups;

  {
    std::ostringstream os;
    os << "variant,metric,baseline_mean,baseline_std,fair_mean,fair_std,pct_change,test,p_value,significant,complete\n";
    for (auto agg : {Aggregation::fold_average, Aggregation::best_of_run}) {
      for (const auto& s : summarize(result, agg)) {
        os << to_string(agg) << ',' << to_string(s.metric) << ',' << fmt6(s.baseline_mean) << ','
           << fmt6(s.baseline_std) << ',' << fmt6(s.fair_mean) << ',' << fmt6(s.fair_std) << ','
           << fmt6(s.pct_change) << ',';
        if (s.verdict)
          os << s.verdict->test << ',' << fmt6(s.verdict->p_value) << ',' << (s.verdict->significant ? "true" : "false");
        else
          os << "insufficient," << kNullMarker << ",false";
        os << ',' << (s.complete ? "true" : "false") << '\n';
      }
    }
    detail::write_text(out_dir / "table4.csv", os.str());
  }

  {
    std::ostringstream os;
    os << "setup,seed,fold,fairness_mean,performance_mean,pearson_r\n";
    for (auto setup : setups) {
      const auto runs = result.completed(setup);
      std::vector<double> fx, py;
      for (const auto* r : runs) {
        fx.push_back(solution_fairness_mean(r->test_report));
        py.push_back(solution_performance_mean(r->test_report));
      }
      const auto rho = stats::pearson(fx, py);
      for (std::size_t i = 0; i < runs.size(); ++i)
        os << setup_name(setup) << ',' << runs[i]->seed_index << ',' << runs[i]->fold << ',' << fmt6(fx[i]) << ','
           << fmt6(py[i]) << ',' << fmt6(rho) << '\n';
    }
    detail::write_text(out_dir / "scatter.csv", os.str());
  }

  {
    std::ostringstream os;
    os << "setup,dr_mode,count\n";
    for (auto setup : setups) {
      std::map<DrMode, std::size_t> counts;
      for (const auto* r : result.completed(setup)) ++counts[r->genome.dr_mode];
      for (auto m : kAllDrModes) os << setup_name(setup) << ',' << to_string(m) << ',' << counts[m] << '\n';
    }
    detail::write_text(out_dir / "dr_modes.csv", os.str());
  }

  {
    std::ostringstream os;
    os << "setup,feature,sensitive,count\n";
    for (auto setup : setups) {
      std::vector<std::size_t> counts(result.meta.feature_names.size(), 0);
      for (const auto* r : result.completed(setup)) {
        const auto mask = r->genome.effective_mask();
        for (std::size_t i = 0; i < mask.size() && i < counts.size(); ++i) counts[i] += mask[i];
      }
      for (std::size_t i = 0; i < counts.size(); ++i)
        os << setup_name(setup) << ',' << result.meta.feature_names[i] << ','
           << (result.meta.feature_sensitive[i] ? "true" : "false") << ',' << counts[i] << '\n';
    }
    detail::write_text(out_dir / "features.csv", os.str());
  }

  {
    std::ostringstream os;
    os << "setup,model,count\n";
    for (auto setup : setups) {
      std::map<ModelId, std::size_t> counts;
      for (const auto* r : result.completed(setup)) ++counts[r->genome.model.id];
      for (auto id : kAllModels) os << setup_name(setup) << ',' << to_string(id) << ',' << counts[id] << '\n';
    }
    detail::write_text(out_dir / "models.csv", os.str());
  }

  {
    std::ostringstream os;
    os << "setup,generation,best_fitness,mean_fitness,mcc,tpr,dp,eo,abroca,fairness_component,performance_component\n";
    for (auto setup : setups) {
      for (const auto& row : evolution_means(result, setup))
        os << setup_name(setup) << ',' << row.generation << ',' << fmt6(row.best_fitness) << ','
           << fmt6(row.mean_fitness) << ',' << fmt6(row.mcc) << ',' << fmt6(row.tpr) << ',' << fmt6(row.dp) << ','
           << fmt6(row.eo) << ',' << fmt6(row.abroca) << ',' << fmt6(row.fairness_component) << ','
           << fmt6(row.performance_component) << '\n';
    }
    detail::write_text(out_dir / "evolution.csv", os.str());
  }

  {
    std::ostringstream os;
    os << "attribute,category,original,baseline_mean,baseline_std,baseline_n,fair_mean,fair_std,fair_n\n";
    for (const auto& cat : result.meta.sensitive_categories) {
      os << cat.attribute << ',' << cat.category << ',' << fmt6(cat.original);
      for (auto setup : {FitnessMode::baseline, FitnessMode::fairness_aware}) {
        std::vector<double> v;
        for (const auto* r : result.completed(setup)) {
          auto it = r->sensitive_props.find(cat.attribute);
          if (it != r->sensitive_props.end()) v.push_back(it->second);
        }
        if (v.empty()) os << ',' << kNullMarker << ',' << kNullMarker << ",0";
        else os << ',' << fmt6(stats::mean(v)) << ',' << fmt6(stats::stddev(v)) << ',' << v.size();
      }
      os << '\n';
    }
    detail::write_text(out_dir / "sensitive_props.csv", os.str());
  }
}

}  // namespace fairevo
