#include <gtest/gtest.h>

#include <set>

#include "fairevo/search.hpp"
#include "fixtures.hpp"

using namespace fairevo;

namespace {

struct Problem {
  TabularDataset ds;
  TrainValidationSplit split;
  SearchSpace space;
  SearchData data() const { return SearchData{ds, split.train, split.validation, {}}; }
};

Problem problem(std::size_t n = 300, std::uint64_t seed = 1) {
  auto ds = fixtures::synthetic(n, seed);
  auto split = train_validation_split(ds.labels(), fixtures::iota_rows(n), 0.25, seed);
  auto space = SearchSpace::for_dataset(ds);
  return Problem{std::move(ds), std::move(split), std::move(space)};
}

SearchConfig small_config(std::uint64_t seed) {
  SearchConfig c;
  c.population_size = 8;
  c.time_budget_s = 1e9;
  c.max_generations = 4;
  c.parallel_jobs = 1;
  c.seed = seed;
  return c;
}

Individual scored(double fitness, double usage, const std::string& key) {
  Individual i;
  i.report.fitness = fitness;
  i.report.instances_frac = usage / 2;
  i.report.features_frac = usage / 2;
  i.key = key;
  i.evaluated = true;
  return i;
}

}  // namespace

TEST(Better, TieBreakOnDataUsageThenKey) {
  EXPECT_TRUE(better(scored(0.2, 2.0, "b"), scored(0.3, 0.1, "a")));
  EXPECT_TRUE(better(scored(0.2, 1.0, "b"), scored(0.2, 2.0, "a")));
  EXPECT_TRUE(better(scored(0.2, 1.0, "a"), scored(0.2, 1.0, "b")));
  EXPECT_FALSE(better(scored(0.2, 1.0, "a"), scored(0.2, 1.0, "a")));
}

TEST(Tournament, SizeOneIsUniform) {
  std::vector<Individual> pop;
  for (int i = 0; i < 5; ++i) pop.push_back(scored(0.1 * i, 1.0, std::to_string(i)));
  Rng rng(1);
  std::vector<int> hits(5, 0);
  for (int t = 0; t < 5000; ++t) ++hits[tournament_select(pop, 1, rng)];
  for (int h : hits) EXPECT_NEAR(h / 5000.0, 0.2, 0.03);
}

TEST(Tournament, FullSizeFavoursBest) {
  std::vector<Individual> pop;
  for (int i = 0; i < 25; ++i) pop.push_back(scored(0.01 * i, 1.0, std::to_string(100 + i)));
  Rng rng(2);
  int best = 0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) best += tournament_select(pop, 25, rng) == 0;
  // k draws with replacement: P(best drawn) = 1 - (24/25)^25
  EXPECT_NEAR(best / static_cast<double>(trials), 1.0 - std::pow(24.0 / 25.0, 25.0), 0.03);
  EXPECT_THROW(tournament_select(pop, 0, rng), ContractError);
}

TEST(Stagnation, PatienceWindow) {
  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
  EXPECT_TRUE(stagnated(flat, 5));
  EXPECT_FALSE(stagnated(std::span(flat).first(5), 5));
  const std::vector<double> improving = {0.5, 0.5, 0.5, 0.5, 0.5, 0.49};
  EXPECT_FALSE(stagnated(improving, 5));
}

TEST(Injection, ReplacesCeilShareAndKeepsElite) {
  const auto p = problem(60);
  std::vector<Individual> pop;
  for (int i = 0; i < 25; ++i) pop.push_back(scored(0.5 + 0.01 * i, 1.0, "k" + std::to_string(i)));
  pop[7].report.fitness = 0.01;  // elite not at slot 0
  const std::vector<double> flat(6, 0.01);
  Rng rng(3);
  const auto replaced = diversity_injection(pop, flat, 5, 0.10, 1, rng, p.space);
  ASSERT_EQ(replaced.size(), 3u);  // ceil(2.5)
  EXPECT_EQ(replaced, (std::vector<std::size_t>{22, 23, 24}));
  EXPECT_EQ(pop.size(), 25u);
  EXPECT_TRUE(pop[7].evaluated);
  for (auto s : replaced) EXPECT_FALSE(pop[s].evaluated);

  auto quiet = pop;
  const std::vector<double> moving = {0.5, 0.4, 0.3, 0.2, 0.1, 0.01};
  EXPECT_TRUE(diversity_injection(quiet, moving, 5, 0.10, 1, rng, p.space).empty());

  // the elite survives even when the whole population is up for replacement
  auto all = pop;
  const auto everything = diversity_injection(all, flat, 5, 1.0, 1, rng, p.space);
  EXPECT_EQ(everything.size(), 24u);
  EXPECT_TRUE(std::find(everything.begin(), everything.end(), 7u) == everything.end());
}

TEST(Evolve, ZeroBudgetReturnsInitialBest) {
  const auto p = problem();
  auto cfg = small_config(5);
  cfg.time_budget_s = 0.0;
  cfg.max_generations = 0;
  const auto r = evolve(cfg, p.data(), p.space);
  EXPECT_TRUE(r.truncated);
  EXPECT_TRUE(r.stopped_by_budget);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.evaluations, cfg.population_size);
  EXPECT_TRUE(same_outcome(r.best_report, r.trace.front().best));
  // the initial population is reproducible from the seed alone
  cfg.time_budget_s = 1e9;
  cfg.max_generations = 1;
  const auto full = evolve(cfg, p.data(), p.space);
  EXPECT_TRUE(same_outcome(full.trace.front().best, r.trace.front().best));
  EXPECT_FALSE(full.truncated);
}

TEST(Evolve, DeterministicAcrossRunsAndThreadCounts) {
  const auto p = problem();
  const auto cfg = small_config(7);
  const auto a = evolve(cfg, p.data(), p.space);
  const auto b = evolve(cfg, p.data(), p.space);
  auto threaded = cfg;
  threaded.parallel_jobs = 3;
  const auto c = evolve(threaded, p.data(), p.space);
  EXPECT_TRUE(same_trace(a.trace, b.trace));
  EXPECT_TRUE(same_trace(a.trace, c.trace));
  EXPECT_EQ(a.best_genome, c.best_genome);
  EXPECT_EQ(a.evaluations, c.evaluations);
  auto other = cfg;
  other.seed = 8;
  EXPECT_FALSE(same_trace(a.trace, evolve(other, p.data(), p.space).trace));
}

TEST(Evolve, BestFitnessNeverWorsens) {
  const auto p = problem(300, 3);
  for (auto mode : {FitnessMode::baseline, FitnessMode::fairness_aware}) {
    auto cfg = small_config(11);
    cfg.max_generations = 8;
    cfg.patience = 2;  // exercise the injection path
    cfg.fitness.mode = mode;
    std::size_t calls = 0;
    const auto r = evolve(cfg, p.data(), p.space, [&](const GenerationTrace&) { ++calls; });
    ASSERT_EQ(r.trace.size(), 9u);
    EXPECT_EQ(calls, r.trace.size());
    for (std::size_t g = 1; g < r.trace.size(); ++g) {
      EXPECT_EQ(r.trace[g].generation, g);
      EXPECT_LE(r.trace[g].best.fitness, r.trace[g - 1].best.fitness);
      EXPECT_GE(r.trace[g].mean_fitness, r.trace[g].best.fitness);
    }
    EXPECT_EQ(r.best_report.fitness, r.trace.back().best.fitness);
    EXPECT_FALSE(r.truncated);
    EXPECT_FALSE(r.stopped_by_budget);
  }
}

TEST(Evolve, BudgetStopsSearch) {
  const auto p = problem(2000, 4);
  auto cfg = small_config(12);
  cfg.max_generations = 0;
  cfg.time_budget_s = 0.5;
  const auto r = evolve(cfg, p.data(), p.space);
  EXPECT_TRUE(r.stopped_by_budget);
  EXPECT_LT(r.elapsed_s, 30.0);
  EXPECT_GE(r.trace.size(), 1u);
}

TEST(Evolve, InvalidConfigRejected) {
  const auto p = problem(60);
  auto cfg = small_config(1);
  cfg.elitism = cfg.population_size;
  EXPECT_THROW(evolve(cfg, p.data(), p.space), ConfigError);
  cfg = small_config(1);
  cfg.fitness.alpha = 1.5;
  EXPECT_THROW(evolve(cfg, p.data(), p.space), ConfigError);
}

TEST(Trace, JsonRoundTrip) {
  const auto p = problem();
  const auto r = evolve(small_config(3), p.data(), p.space);
  std::vector<GenerationTrace> back;
  for (const auto& t : r.trace) back.push_back(trace_from_json(to_json(t)));
  EXPECT_TRUE(same_trace(back, r.trace));
}
