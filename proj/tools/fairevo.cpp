#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fairevo/cli.hpp"

int main(int argc, char** argv) {
  using namespace fairevo::cli;
  CLI::App app{"fairevo: fairness-aware evolutionary AutoML for tabular binary classification"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiment protocol from a config file");
  std::string config_path;
  RunOverrides ov;
  double alpha = 0, budget = 0;
  std::size_t seeds = 0, folds = 0, jobs = 0;
  std::string out_dir, setup;
  run->add_option("--config", config_path, "JSON run configuration")->required();
  auto* o_alpha = run->add_option("--alpha", alpha, "fairness-aware weight of the performance component");
  auto* o_budget = run->add_option("--time-budget", budget, "search time budget per run, seconds");
  auto* o_seeds = run->add_option("--seeds", seeds, "number of independent seeds");
  auto* o_folds = run->add_option("--folds", folds, "outer stratified folds");
  auto* o_jobs = run->add_option("--jobs", jobs, "parallel evaluations per generation");
  auto* o_out = run->add_option("--out", out_dir, "artifact directory");
  auto* o_setup = run->add_option("--setup", setup, "baseline|fair|both")
                      ->check(CLI::IsMember({"baseline", "fair", "both"}));

  auto* sc = app.add_subcommand("score", "score predictions against labels and sensitive groups");
  std::string preds_path, labels_path, groups_path;
  sc->add_option("--predictions", preds_path, "one score in [0,1] per line")->required();
  sc->add_option("--labels", labels_path, "one 0/1 label per line")->required();
  sc->add_option("--groups", groups_path, "one comma-separated group descriptor per line")->required();

  auto* rep = app.add_subcommand("report", "regenerate aggregate CSVs from persisted runs");
  std::string artifact_dir;
  rep->add_option("dir", artifact_dir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*run) {
    if (*o_alpha) ov.alpha = alpha;
    if (*o_budget) ov.time_budget_s = budget;
    if (*o_seeds) ov.n_seeds = seeds;
    if (*o_folds) ov.k_folds = folds;
    if (*o_jobs) ov.parallel_jobs = jobs;
    if (*o_out) ov.out_dir = out_dir;
    if (*o_setup) ov.setup = setup;
    return cmd_run(config_path, ov, std::cout, std::cerr);
  }
  if (*sc) return cmd_score(preds_path, labels_path, groups_path, std::cout, std::cerr);
  return cmd_report(artifact_dir, std::cout, std::cerr);
}
