#pragma once

/// @file cli.hpp
/// Thin command layer behind tools/fairevo: run, score and report.
/// Exit codes: 0 success, 1 runtime failure, 2 usage/config/input error.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairevo/data.hpp"
#include "fairevo/error.hpp"
#include "fairevo/fairness.hpp"
#include "fairevo/harness.hpp"
#include "fairevo/metrics.hpp"

namespace fairevo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class SetupSelection { baseline, fair, both };

inline SetupSelection setup_selection_from_string(std::string_view s) {
  if (s == "baseline") return SetupSelection::baseline;
  if (s == "fair") return SetupSelection::fair;
  if (s == "both") return SetupSelection::both;
  throw ConfigError("setup must be one of baseline|fair|both, got '" + std::string(s) + "'");
}

inline std::string to_string(SetupSelection s) {
  switch (s) {
    case SetupSelection::baseline: return "baseline";
    case SetupSelection::fair: return "fair";
    case SetupSelection::both: return "both";
  }
  return "both";
}

struct RunConfigFile {
  std::filesystem::path dataset;
  std::filesystem::path schema;
  std::string dataset_id;
  std::optional<std::vector<std::string>> sensitive;  // overrides the schema flags
  SetupSelection setup = SetupSelection::both;
  std::filesystem::path out_dir = "results";
  std::size_t k_folds = 5;
  std::size_t n_seeds = 5;
  std::uint64_t seed = 0;
  double validation_fraction = 0.25;
  std::size_t subsample_rows = 0;  // 0 keeps every row
  std::size_t max_concurrent_runs = 1;
  SearchConfig search;

  void validate() const {
    search.validate();
    if (k_folds < 2) throw ConfigError("k_folds must be >= 2");
    if (n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw ConfigError("validation_fraction must be in (0,1)");
    if (max_concurrent_runs < 1) throw ConfigError("max_concurrent_runs must be >= 1");
  }

  std::vector<FitnessMode> setups() const {
    switch (setup) {
      case SetupSelection::baseline: return {FitnessMode::baseline};
      case SetupSelection::fair: return {FitnessMode::fairness_aware};
      case SetupSelection::both: break;
    }
    return {FitnessMode::baseline, FitnessMode::fairness_aware};
  }
};

inline nlohmann::json to_json(const RunConfigFile& c) {
  nlohmann::json j = {{"dataset", c.dataset.string()},
                      {"schema", c.schema.string()},
                      {"dataset_id", c.dataset_id},
                      {"setup", to_string(c.setup)},
                      {"out_dir", c.out_dir.string()},
                      {"k_folds", c.k_folds},
                      {"n_seeds", c.n_seeds},
                      {"seed", c.seed},
                      {"validation_fraction", c.validation_fraction},
                      {"subsample_rows", c.subsample_rows},
                      {"max_concurrent_runs", c.max_concurrent_runs},
                      {"population_size", c.search.population_size},
                      {"tournament_size", c.search.tournament_size},
                      {"elitism", c.search.elitism},
                      {"p_crossover", c.search.p_crossover},
                      {"p_mutation", c.search.p_mutation},
                      {"patience", c.search.patience},
                      {"change_pct", c.search.change_pct},
                      {"time_budget_s", c.search.time_budget_s},
                      {"parallel_jobs", c.search.parallel_jobs},
                      {"max_generations", c.search.max_generations},
                      {"alpha", c.search.fitness.alpha}};
  j["sensitive"] = c.sensitive ? nlohmann::json(*c.sensitive) : nlohmann::json(nullptr);
  return j;
}

/// Parses a config object. Relative paths are resolved against `base_dir`.
inline RunConfigFile parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfigFile c;
  auto path_of = [&](const nlohmann::json& v) {
    std::filesystem::path p = v.get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "dataset") c.dataset = path_of(v);
      else if (key == "schema") c.schema = path_of(v);
      else if (key == "dataset_id") c.dataset_id = v.get<std::string>();
      else if (key == "sensitive") {
        if (!v.is_null()) c.sensitive = v.get<std::vector<std::string>>();
      } else if (key == "setup") c.setup = setup_selection_from_string(v.get<std::string>());
      else if (key == "out_dir") c.out_dir = path_of(v);
      else if (key == "k_folds") c.k_folds = v.get<std::size_t>();
      else if (key == "n_seeds") c.n_seeds = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "validation_fraction") c.validation_fraction = v.get<double>();
      else if (key == "subsample_rows") c.subsample_rows = v.get<std::size_t>();
      else if (key == "max_concurrent_runs") c.max_concurrent_runs = v.get<std::size_t>();
      else if (key == "population_size") c.search.population_size = v.get<std::size_t>();
      else if (key == "tournament_size") c.search.tournament_size = v.get<std::size_t>();
      else if (key == "elitism") c.search.elitism = v.get<std::size_t>();
      else if (key == "p_crossover") c.search.p_crossover = v.get<double>();
      else if (key == "p_mutation") c.search.p_mutation = v.get<double>();
      else if (key == "patience") c.search.patience = v.get<std::size_t>();
      else if (key == "change_pct") c.search.change_pct = v.get<double>();
      else if (key == "time_budget_s") c.search.time_budget_s = v.get<double>();
      else if (key == "parallel_jobs") c.search.parallel_jobs = v.get<std::size_t>();
      else if (key == "max_generations") c.search.max_generations = v.get<std::size_t>();
      else if (key == "alpha") c.search.fitness.alpha = v.get<double>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("bad value for '" + key + "': " + e.what());
    }
  }
  if (c.dataset.empty()) throw ConfigError("config is missing 'dataset'");
  if (c.schema.empty()) throw ConfigError("config is missing 'schema'");
  if (c.dataset_id.empty()) c.dataset_id = c.dataset.stem().string();
  return c;
}

inline RunConfigFile load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path());
}

struct RunOverrides {
  std::optional<double> alpha;
  std::optional<double> time_budget_s;
  std::optional<std::size_t> n_seeds;
  std::optional<std::size_t> k_folds;
  std::optional<std::size_t> parallel_jobs;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::string> setup;
};

inline void apply_overrides(RunConfigFile& c, const RunOverrides& o) {
  if (o.alpha) c.search.fitness.alpha = *o.alpha;
  if (o.time_budget_s) c.search.time_budget_s = *o.time_budget_s;
  if (o.n_seeds) c.n_seeds = *o.n_seeds;
  if (o.k_folds) c.k_folds = *o.k_folds;
  if (o.parallel_jobs) c.search.parallel_jobs = *o.parallel_jobs;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.setup) c.setup = setup_selection_from_string(*o.setup);
}

/// Loads the dataset named by a config, applying the sensitive-attribute
/// override and the optional stratified subsample.
inline TabularDataset load_config_dataset(const RunConfigFile& c) {
  if (!std::filesystem::exists(c.dataset)) throw ConfigError("dataset file not found: " + c.dataset.string());
  if (!std::filesystem::exists(c.schema)) throw ConfigError("schema file not found: " + c.schema.string());
  Schema schema = load_schema(c.schema);
  if (c.sensitive) {
    for (const auto& name : *c.sensitive) {
      const bool known = std::any_of(schema.columns.begin(), schema.columns.end(),
                                     [&](const ColumnSpec& s) { return s.name == name; });
      if (!known) throw ConfigError("sensitive attribute '" + name + "' is not in the schema");
    }
    for (auto& col : schema.columns)
      col.is_sensitive = std::find(c.sensitive->begin(), c.sensitive->end(), col.name) != c.sensitive->end();
  }
  auto ds = load_csv(c.dataset, schema);
  if (c.subsample_rows > 0) ds = subsample(ds, c.subsample_rows, c.seed);
  return ds;
}

inline ExperimentPlan make_plan(const RunConfigFile& c) {
  ExperimentPlan p;
  p.dataset_id = c.dataset_id;
  p.k_folds = c.k_folds;
  p.n_seeds = c.n_seeds;
  p.seed_base = c.seed;
  p.setups = c.setups();
  p.search = c.search;
  p.validation_fraction = c.validation_fraction;
  p.max_concurrent_runs = c.max_concurrent_runs;
  p.out_dir = c.out_dir;
  return p;
}

inline int cmd_run(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& out,
                   std::ostream& err) {
  RunConfigFile cfg;
  std::optional<TabularDataset> ds;
  try {
    cfg = load_run_config(config_path);
    apply_overrides(cfg, overrides);
    cfg.validate();
    ds = load_config_dataset(cfg);
    if (ds->sensitive_columns().empty()) throw ConfigError("no sensitive attributes declared");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "dataset error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    std::filesystem::create_directories(cfg.out_dir);
    detail::write_text(cfg.out_dir / "config.json", to_json(cfg).dump(2) + "\n");
    const auto plan = make_plan(cfg);
    const std::size_t total = plan.n_seeds * plan.k_folds * plan.setups.size();
    std::size_t done = 0;
    const auto res = run_experiment(*ds, plan, [&](const RunRecord& r) {
      ++done;
      err << "[" << done << "/" << total << "] seed " << r.seed_index << " fold " << r.fold << " "
          << setup_name(r.setup);
      if (r.ok)
        err << " test fitness " << fmt6(r.test_report.fitness) << " (" << r.trace.size() << " generations)\n";
      else
        err << " FAILED: " << r.error << '\n';
    });
    std::size_t failed = 0;
    for (const auto& r : res.runs) failed += !r.ok;
    out << "completed " << (res.runs.size() - failed) << "/" << res.runs.size() << " runs; reports in "
        << cfg.out_dir.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitFailure;
  }
}

struct ScoreInputs {
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<std::string> groups;
};

inline std::vector<std::string> read_tokens(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

/// Predictions are scores in [0,1] (hard 0/1 values are valid scores),
/// labels are 0/1; one value per line. A groups line holds one category per
/// sensitive attribute, comma-separated; subgroups are their combinations.
inline ScoreInputs read_score_inputs(const std::filesystem::path& predictions, const std::filesystem::path& labels,
                                     const std::filesystem::path& groups) {
  ScoreInputs s;
  const auto p = read_tokens(predictions), l = read_tokens(labels);
  s.groups = read_tokens(groups);
  if (p.empty() || l.empty() || s.groups.empty()) throw ConfigError("input files must not be empty");
  if (p.size() != l.size() || p.size() != s.groups.size())
    throw ConfigError("row counts differ: predictions " + std::to_string(p.size()) + ", labels " +
                      std::to_string(l.size()) + ", groups " + std::to_string(s.groups.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto v = detail::parse_double(p[i]);
    if (!v || *v < 0.0 || *v > 1.0) throw ConfigError("prediction line " + std::to_string(i + 1) + " is not in [0,1]");
    s.scores.push_back(*v);
    if (l[i] != "0" && l[i] != "1") throw ConfigError("label line " + std::to_string(i + 1) + " is not 0/1");
    s.labels.push_back(l[i] == "1" ? 1 : 0);
  }
  return s;
}

struct ScoreReport {
  PerformanceBundle performance;
  FairnessBundle fairness;
  double baseline_fitness = 0.0;
  double fair_fitness = 0.0;
};

inline ScoreReport score(const ScoreInputs& in, double alpha = 0.8, const FairnessOptions& opt = {}) {
  ScoreReport r;
  const auto preds = threshold_scores(in.scores);
  const auto counts = confusion(preds, in.labels);
  const bool both = counts.tp + counts.fn > 0 && counts.fp + counts.tn > 0;
  r.performance = make_performance(counts, both ? roc_and_auc(in.scores, in.labels).auc : 0.5);
  std::vector<std::vector<std::string>> cats;
  for (const auto& g : in.groups) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const auto pos = g.find(',', start);
      parts.emplace_back(detail::trim(std::string_view(g).substr(start, pos == std::string::npos ? pos : pos - start)));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (!cats.empty() && parts.size() != cats.front().size()) throw ConfigError("groups file has inconsistent arity");
    cats.push_back(std::move(parts));
  }
  std::vector<std::string> attrs;
  for (std::size_t a = 0; a < cats.front().size(); ++a) attrs.push_back("attr" + std::to_string(a));
  const auto sg = SubgroupIndex::build(attrs, cats, in.labels);
  r.fairness = evaluate_fairness(in.scores, in.labels, sg, opt);
  r.baseline_fitness = combine_fitness(r.performance.performance_component, r.fairness.fairness_component,
                                       {alpha, FitnessMode::baseline});
  r.fair_fitness = combine_fitness(r.performance.performance_component, r.fairness.fairness_component,
                                   {alpha, FitnessMode::fairness_aware});
  return r;
}

inline void print_score(const ScoreReport& r, std::ostream& out) {
  auto line = [&](const char* name, double v) { out << std::left << std::setw(24) << name << fmt6(v) << '\n'; };
  line("DP", r.fairness.dp);
  line("EO", r.fairness.eo);
  line("ABROCA", r.fairness.abroca);
  line("MCC", r.performance.mcc);
  line("TPR", r.performance.tpr);
  line("F1", r.performance.f1);
  line("AUCROC", r.performance.aucroc);
  line("nMCC", r.performance.nmcc);
  line("performance_component", r.performance.performance_component);
  line("fairness_component", r.fairness.fairness_component);
  line("fitness_baseline", r.baseline_fitness);
  line("fitness_fair", r.fair_fitness);
}

inline int cmd_score(const std::filesystem::path& predictions, const std::filesystem::path& labels,
                     const std::filesystem::path& groups, std::ostream& out, std::ostream& err) {
  ScoreInputs in;
  try {
    in = read_score_inputs(predictions, labels, groups);
  } catch (const std::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  }
  try {
    print_score(score(in), out);
    return kExitOk;
  } catch (const std::exception& e) {
    err << "scoring failed: " << e.what() << '\n';
    return kExitFailure;
  }
}

inline int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
  if (!std::filesystem::is_directory(dir) || !std::filesystem::exists(dir / "experiment.json")) {
    err << "artifact directory not found: " << dir.string() << '\n';
    return kExitUsage;
  }
  try {
    const auto res = load_experiment(dir);
    emit_reports(res, dir);
    std::size_t ok = 0;
    for (const auto& r : res.runs) ok += r.ok;
    out << "regenerated reports from " << ok << "/" << res.runs.size() << " completed runs in " << dir.string()
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "report failed: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fairevo::cli
