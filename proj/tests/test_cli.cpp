#include <gtest/gtest.h>
#include <sys/wait.h>

#include <fstream>
#include <random>
#include <sstream>

#include "fairevo/cli.hpp"
#include "oracles.hpp"

using namespace fairevo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fairevo_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome invoke(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(FAIREVO_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// A small CSV with a learnable label and a sex attribute, plus its schema.
void write_dataset(const fs::path& dir, std::size_t n = 160) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::ostringstream csv;
  csv << "x0,x1,sex,label\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z(rng), b = z(rng);
    const bool male = rng() % 2;
    const bool pos = a + 0.5 * b + (male ? 0.6 : -0.6) + 0.5 * z(rng) > 0.3;
    csv << a << ',' << b << ',' << (male ? "M" : "F") << ',' << (pos ? "yes" : "no") << '\n';
  }
  spit(dir / "toy.csv", csv.str());
  spit(dir / "toy.schema.json", R"({"columns": [
    {"name": "x0", "kind": "numeric", "is_sensitive": false, "is_label": false},
    {"name": "x1", "kind": "numeric", "is_sensitive": false, "is_label": false},
    {"name": "sex", "kind": "categorical", "is_sensitive": true, "is_label": false},
    {"name": "label", "kind": "categorical", "is_sensitive": false, "is_label": true}],
    "positive_label": "yes"})");
}

void write_config(const fs::path& dir, const std::string& extra = "") {
  spit(dir / "run.json", R"({"dataset": "toy.csv", "schema": "toy.schema.json", "out_dir": "out",
    "n_seeds": 1, "k_folds": 2, "population_size": 4, "max_generations": 1, "parallel_jobs": 1)" +
                             extra + "}");
}

}  // namespace

TEST(CliRun, TinyBudgetProducesArtifacts) {
  const auto dir = scratch("run");
  write_dataset(dir);
  write_config(dir);
  const auto r = invoke("run --config " + (dir / "run.json").string() + " --alpha 0.7", dir);
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto* f : {"config.json", "experiment.json", "table4.csv", "scatter.csv", "evolution.csv"})
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  const auto persisted = nlohmann::json::parse(slurp(dir / "out" / "config.json"));
  EXPECT_EQ(persisted.at("alpha").get<double>(), 0.7);
  EXPECT_EQ(persisted.at("population_size").get<int>(), 4);
  EXPECT_NE(r.out.find("completed 4/4"), std::string::npos);

  // report regenerates the same table from the persisted records
  const auto before = slurp(dir / "out" / "table4.csv");
  fs::remove(dir / "out" / "table4.csv");
  const auto rep = invoke("report " + (dir / "out").string(), dir);
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(slurp(dir / "out" / "table4.csv"), before);
}

TEST(CliRun, AlphaOverrideRecorded) {
  const auto dir = scratch("alpha");
  write_dataset(dir);
  write_config(dir, R"(, "alpha": 0.5, "setup": "fair")");
  ASSERT_EQ(invoke("run --config " + (dir / "run.json").string() + " --alpha 0.8 --out " + (dir / "o2").string(), dir).code,
            0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "o2" / "config.json")).at("alpha").get<double>(), 0.8);
  EXPECT_FALSE(fs::exists(dir / "o2" / "runs" / "seed0_fold0_baseline"));
  EXPECT_TRUE(fs::exists(dir / "o2" / "runs" / "seed0_fold0_fair"));
}

TEST(CliRun, ConfigErrorsExitTwo) {
  const auto dir = scratch("bad");
  write_dataset(dir);
  spit(dir / "missing.json", R"({"dataset": "nope.csv", "schema": "toy.schema.json"})");
  EXPECT_EQ(invoke("run --config " + (dir / "missing.json").string(), dir).code, 2);
  spit(dir / "unknown.json", R"({"dataset": "toy.csv", "schema": "toy.schema.json", "colour": 1})");
  const auto u = invoke("run --config " + (dir / "unknown.json").string(), dir);
  EXPECT_EQ(u.code, 2);
  EXPECT_NE(u.err.find("colour"), std::string::npos);
  write_config(dir, R"(, "elitism": 4)");
  EXPECT_EQ(invoke("run --config " + (dir / "run.json").string(), dir).code, 2);
  write_config(dir);
  EXPECT_EQ(invoke("run --config " + (dir / "run.json").string() + " --setup neither", dir).code, 2);
  EXPECT_EQ(invoke("run", dir).code, 2);
  EXPECT_EQ(invoke("--help", dir).code, 0);
}

TEST(CliScore, PerfectPredictionsOneGroup) {
  const auto dir = scratch("perfect");
  spit(dir / "p.txt", "1\n0\n1\n0\n1\n0\n");
  spit(dir / "y.txt", "1\n0\n1\n0\n1\n0\n");
  spit(dir / "g.txt", "a\na\na\na\na\na\n");
  const auto r = invoke("score --predictions " + (dir / "p.txt").string() + " --labels " + (dir / "y.txt").string() +
                         " --groups " + (dir / "g.txt").string(),
                     dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto in = cli::read_score_inputs(dir / "p.txt", dir / "y.txt", dir / "g.txt");
  const auto rep = cli::score(in);
  EXPECT_EQ(rep.performance.mcc, 1.0);
  EXPECT_EQ(rep.fairness.dp, 0.0);
  EXPECT_EQ(rep.fairness.eo, 0.0);
  EXPECT_EQ(rep.fairness.abroca, 0.0);
  // the binary prints exactly what the library prints
  std::ostringstream lib;
  cli::print_score(rep, lib);
  EXPECT_EQ(r.out, lib.str());
}

TEST(CliScore, ThreeGroupFixtureMatchesOracle) {
  const std::vector<double> s = {0.9, 0.2, 0.7, 0.4, 0.6, 0.3, 0.8, 0.1, 0.55, 0.45, 0.35, 0.65};
  const std::vector<int> y = {1, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<std::string> g = {"a", "a", "a", "a", "b", "b", "b", "b", "c", "c", "c", "c"};
  const auto dir = scratch("three");
  std::ostringstream ps, ls, gs;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ps << s[i] << '\n';
    ls << y[i] << '\n';
    gs << g[i] << '\n';
  }
  spit(dir / "p.txt", ps.str());
  spit(dir / "y.txt", ls.str());
  spit(dir / "g.txt", gs.str());
  const auto rep = cli::score(cli::read_score_inputs(dir / "p.txt", dir / "y.txt", dir / "g.txt"));
  const auto preds = threshold_scores(s);
  EXPECT_EQ(rep.fairness.dp, oracle::dp(preds, g));
  EXPECT_EQ(rep.fairness.eo, oracle::eo(preds, y, g));
  EXPECT_NEAR(rep.fairness.abroca, oracle::abroca(s, y, g), 0.01);
  EXPECT_NEAR(rep.performance.mcc, oracle::mcc(preds, y), 1e-12);
  EXPECT_NEAR(rep.fair_fitness, 0.8 * rep.performance.performance_component + 0.2 * rep.fairness.fairness_component,
              1e-15);
}

TEST(CliScore, BadInputsExitTwo) {
  const auto dir = scratch("badscore");
  spit(dir / "p.txt", "0.9\n0.1\n");
  spit(dir / "y.txt", "1\n0\n1\n");
  spit(dir / "g.txt", "a\nb\n");
  spit(dir / "e.txt", "");
  auto args = [&](const char* p, const char* y, const char* g) {
    return "score --predictions " + (dir / p).string() + " --labels " + (dir / y).string() + " --groups " +
           (dir / g).string();
  };
  EXPECT_EQ(invoke(args("p.txt", "y.txt", "g.txt"), dir).code, 2);
  EXPECT_EQ(invoke(args("e.txt", "e.txt", "e.txt"), dir).code, 2);
  spit(dir / "y2.txt", "1\n2\n");
  EXPECT_EQ(invoke(args("p.txt", "y2.txt", "g.txt"), dir).code, 2);
  spit(dir / "p2.txt", "1.5\n0.1\n");
  EXPECT_EQ(invoke(args("p2.txt", "y.txt", "g.txt"), dir).code, 2);
  EXPECT_EQ(invoke(args("missing.txt", "y.txt", "g.txt"), dir).code, 2);
}

TEST(CliReport, MissingDirAndCorruptRecord) {
  const auto dir = scratch("report");
  EXPECT_EQ(invoke("report " + (dir / "absent").string(), dir).code, 2);
  write_dataset(dir);
  write_config(dir);
  ASSERT_EQ(invoke("run --config " + (dir / "run.json").string(), dir).code, 0);
  const auto victim = dir / "out" / "runs" / "seed0_fold1_baseline" / "genome.json";
  spit(victim, "{not json");
  const auto r = invoke("report " + (dir / "out").string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("genome.json"), std::string::npos);
}

TEST(CliReport, PartialRunsMarkedIncomplete) {
  const auto dir = scratch("partial");
  write_dataset(dir);
  write_config(dir);
  ASSERT_EQ(invoke("run --config " + (dir / "run.json").string(), dir).code, 0);
  fs::remove_all(dir / "out" / "runs" / "seed0_fold1_fair");
  ASSERT_EQ(invoke("report " + (dir / "out").string(), dir).code, 0);
  const auto table = slurp(dir / "out" / "table4.csv");
  EXPECT_EQ(table.find(",true\n"), std::string::npos);
  EXPECT_NE(table.find(",false\n"), std::string::npos);
}

TEST(CliConfig, RoundTripAndOverrides) {
  const auto c = cli::parse_run_config(nlohmann::json::parse(R"({"dataset": "d.csv", "schema": "s.json", "seed": 4,
      "time_budget_s": 30, "sensitive": ["sex"]})"),
                                       "/base");
  EXPECT_EQ(c.dataset, fs::path("/base/d.csv"));
  EXPECT_EQ(c.dataset_id, "d");
  auto back = cli::parse_run_config(cli::to_json(c));
  EXPECT_EQ(cli::to_json(back), cli::to_json(c));
  cli::RunOverrides o;
  o.time_budget_s = 5;
  o.setup = "baseline";
  cli::apply_overrides(back, o);
  EXPECT_EQ(back.search.time_budget_s, 5.0);
  EXPECT_EQ(back.setups(), std::vector<FitnessMode>{FitnessMode::baseline});
  EXPECT_THROW(cli::parse_run_config(nlohmann::json::parse(R"({"schema": "s.json"})")), ConfigError);
  EXPECT_THROW(cli::parse_run_config(nlohmann::json::parse(R"({"dataset": "d", "schema": "s", "k_folds": "x"})")),
               ConfigError);
}
