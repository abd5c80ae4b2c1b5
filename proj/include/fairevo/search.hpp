#pragma once

/// @file search.hpp
/// Generational GA over pipeline genomes: tournament selection, uniform
/// crossover, mutation, elitism, random-immigrant injection on stagnation,
/// a soft wall-clock budget and parallel fitness evaluation.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "fairevo/data.hpp"
#include "fairevo/error.hpp"
#include "fairevo/pipeline.hpp"
#include "fairevo/random.hpp"

namespace fairevo {

struct SearchConfig {
  std::size_t population_size = 25;
  std::size_t tournament_size = 3;
  std::size_t elitism = 1;
  double p_crossover = 0.7;
  double p_mutation = 0.3;
  std::size_t patience = 5;
  double change_pct = 0.10;
  double time_budget_s = 1800.0;
  std::size_t parallel_jobs = 5;
  std::uint64_t seed = 0;
  // 0 means "until the time budget runs out".
  std::size_t max_generations = 0;
  FitnessConfig fitness;

  void validate() const {
    if (population_size < 2) throw ConfigError("population_size must be >= 2");
    if (elitism >= population_size) throw ConfigError("elitism must be < population_size");
    if (tournament_size < 1 || tournament_size > population_size)
      throw ConfigError("tournament_size must be in [1, population_size]");
    if (!(change_pct >= 0.0 && change_pct <= 1.0)) throw ConfigError("change_pct must be in [0,1]");
    if (!(p_crossover >= 0.0 && p_crossover <= 1.0)) throw ConfigError("p_crossover must be in [0,1]");
    if (!(p_mutation >= 0.0 && p_mutation <= 1.0)) throw ConfigError("p_mutation must be in [0,1]");
    if (!(fitness.alpha >= 0.0 && fitness.alpha <= 1.0)) throw ConfigError("alpha must be in [0,1]");
    if (!(time_budget_s >= 0.0)) throw ConfigError("time_budget_s must be >= 0");
    if (parallel_jobs < 1) throw ConfigError("parallel_jobs must be >= 1");
  }
};

struct Individual {
  PipelineGenome genome;
  FitnessReport report;
  std::string key;  // serialize(genome)
  bool evaluated = false;
};

struct GenerationTrace {
  std::size_t generation = 0;
  FitnessReport best;
  PipelineGenome best_genome;
  double mean_fitness = 0.0;
  double elapsed_s = 0.0;
  std::size_t injected = 0;
};

inline nlohmann::json to_json(const GenerationTrace& t) {
  return {{"generation", t.generation},   {"best", to_json(t.best)},   {"best_genome", to_json(t.best_genome)},
          {"mean_fitness", t.mean_fitness}, {"elapsed_s", t.elapsed_s}, {"injected", t.injected}};
}

inline GenerationTrace trace_from_json(const nlohmann::json& j) {
  GenerationTrace t;
  t.generation = j.at("generation").get<std::size_t>();
  t.best = fitness_report_from_json(j.at("best"));
  t.best_genome = genome_from_json(j.at("best_genome"));
  t.mean_fitness = j.at("mean_fitness").get<double>();
  t.elapsed_s = j.at("elapsed_s").get<double>();
  t.injected = j.at("injected").get<std::size_t>();
  return t;
}

/// Trace equality ignoring wall-clock fields.
inline bool same_trace(const std::vector<GenerationTrace>& a, const std::vector<GenerationTrace>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].generation != b[i].generation || !same_outcome(a[i].best, b[i].best) ||
        a[i].best_genome != b[i].best_genome || a[i].mean_fitness != b[i].mean_fitness ||
        a[i].injected != b[i].injected)
      return false;
  }
  return true;
}

struct SearchResult {
  PipelineGenome best_genome;
  FitnessReport best_report;
  std::vector<GenerationTrace> trace;
  bool truncated = false;          // budget ran out before any offspring generation completed
  bool stopped_by_budget = false;
  std::size_t evaluations = 0;
  double elapsed_s = 0.0;
};

/// Strict weak order used for selection: fitness, then data usage, then the
/// serialized genome.
inline bool better(const Individual& a, const Individual& b) {
  if (a.report.fitness != b.report.fitness) return a.report.fitness < b.report.fitness;
  if (a.report.data_usage() != b.report.data_usage()) return a.report.data_usage() < b.report.data_usage();
  return a.key < b.key;
}

/// k draws with replacement; returns the index of the best drawn individual.
inline std::size_t tournament_select(std::span<const Individual> pop, std::size_t k, Rng& rng) {
  if (k < 1) throw ContractError("tournament_select: k must be >= 1");
  if (pop.empty()) throw ContractError("tournament_select: empty population");
  std::size_t best = uniform_int<std::size_t>(rng, 0, pop.size() - 1);
  for (std::size_t i = 1; i < k; ++i) {
    const auto c = uniform_int<std::size_t>(rng, 0, pop.size() - 1);
    if (better(pop[c], pop[best])) best = c;
  }
  return best;
}

/// Indices of the population sorted best-first.
inline std::vector<std::size_t> ranking(std::span<const Individual> pop) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return better(pop[a], pop[b]); });
  return idx;
}

/// True when the best fitness improved by less than 1e-6 over the last
/// `patience` generations.
inline bool stagnated(std::span<const double> best_history, std::size_t patience) {
  if (patience == 0 || best_history.size() <= patience) return false;
  return best_history[best_history.size() - 1 - patience] - best_history.back() < 1e-6;
}

/// On stagnation, replaces the worst ceil(change_pct * size) non-elite
/// individuals with fresh random genomes (left unevaluated). Returns the
/// replaced slots; empty when nothing fired.
inline std::vector<std::size_t> diversity_injection(std::vector<Individual>& pop, std::span<const double> best_history,
                                                    std::size_t patience, double change_pct, std::size_t elitism,
                                                    Rng& rng, const SearchSpace& space) {
  if (!stagnated(best_history, patience)) return {};
  const auto order = ranking(pop);
  const auto want = static_cast<std::size_t>(std::ceil(change_pct * static_cast<double>(pop.size()) - 1e-9));
  const auto n = std::min(want, pop.size() - std::min(elitism, pop.size()));
  std::vector<std::size_t> replaced;
  for (std::size_t i = 0; i < n; ++i) {
    const auto slot = order[order.size() - 1 - i];
    pop[slot].genome = random_genome(rng, space);
    pop[slot].key = serialize(pop[slot].genome);
    pop[slot].evaluated = false;
    pop[slot].report = {};
    replaced.push_back(slot);
  }
  std::sort(replaced.begin(), replaced.end());
  return replaced;
}

/// Data the search evaluates genomes against.
struct SearchData {
  const TabularDataset& dataset;
  std::span<const std::size_t> train;
  std::span<const std::size_t> validation;
  FairnessOptions fairness{};
};

namespace detail {

class Clock {
 public:
  Clock() : start_(std::chrono::steady_clock::now()) {}
  double elapsed() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Evaluates pop[slots] with up to `jobs` threads. When `budget` is given,
// no new evaluation starts once it is exhausted; returns false if any slot
// was skipped for that reason.
inline bool evaluate_slots(std::vector<Individual>& pop, const std::vector<std::size_t>& slots,
                           const std::vector<std::uint64_t>& seeds, const SearchData& data, const FitnessConfig& fit,
                           std::size_t jobs, const Clock& clock, std::optional<double> budget) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> skipped{false};
  auto worker = [&] {
    for (;;) {
      const auto i = next.fetch_add(1);
      if (i >= slots.size()) return;
      if (budget && clock.elapsed() >= *budget) {
        skipped = true;
        continue;
      }
      auto& ind = pop[slots[i]];
      ind.report = evaluate(ind.genome, data.dataset, data.train, data.validation, fit, seeds[i], data.fairness);
      ind.evaluated = true;
    }
  };
  const auto n_threads = std::min(jobs, slots.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  }
  return !skipped;
}

inline GenerationTrace make_trace(std::size_t generation, std::span<const Individual> pop, double elapsed,
                                  std::size_t injected) {
  GenerationTrace t;
  t.generation = generation;
  const auto order = ranking(pop);
  t.best = pop[order.front()].report;
  t.best_genome = pop[order.front()].genome;
  double sum = 0.0;
  for (const auto& ind : pop) sum += ind.report.fitness;
  t.mean_fitness = sum / static_cast<double>(pop.size());
  t.elapsed_s = elapsed;
  t.injected = injected;
  return t;
}

}  // namespace detail

/// Seed used to evaluate the individual in `slot` of `generation`.
inline std::uint64_t evaluation_seed(std::uint64_t run_seed, std::size_t generation, std::size_t slot,
                                     std::uint64_t stream = 0) {
  return derive_seed({run_seed, generation, slot, stream});
}

using TraceCallback = std::function<void(const GenerationTrace&)>;

/// Runs the GA. The initial population is always evaluated in full; after
/// that the budget is checked before each generation and before each
/// evaluation, and an interrupted generation is discarded.
inline SearchResult evolve(const SearchConfig& cfg, const SearchData& data, const SearchSpace& space,
                           const TraceCallback& on_generation = {}) {
  cfg.validate();
  const detail::Clock clock;
  Rng rng(mix_seed(cfg.seed));
  SearchResult result;

  std::vector<Individual> pop(cfg.population_size);
  std::vector<std::size_t> slots(pop.size());
  std::vector<std::uint64_t> seeds(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i].genome = random_genome(rng, space);
    pop[i].key = serialize(pop[i].genome);
    slots[i] = i;
    seeds[i] = evaluation_seed(cfg.seed, 0, i);
  }
  detail::evaluate_slots(pop, slots, seeds, data, cfg.fitness, cfg.parallel_jobs, clock, std::nullopt);
  result.evaluations += pop.size();

  auto record = [&](std::size_t gen, std::size_t injected) {
    auto t = detail::make_trace(gen, pop, clock.elapsed(), injected);
    if (on_generation) on_generation(t);
    result.trace.push_back(std::move(t));
  };
  record(0, 0);

  std::vector<double> history{result.trace.back().best.fitness};
  std::size_t generation = 0;
  for (;;) {
    if (cfg.max_generations != 0 && generation >= cfg.max_generations) break;
    if (clock.elapsed() >= cfg.time_budget_s) {
      result.stopped_by_budget = true;
      break;
    }

    // Random immigrants into a stagnant population.
    auto injected = diversity_injection(pop, history, cfg.patience, cfg.change_pct, cfg.elitism, rng, space);
    if (!injected.empty()) {
      std::vector<std::uint64_t> inj_seeds;
      for (auto s : injected) inj_seeds.push_back(evaluation_seed(cfg.seed, generation, s, 1));
      const bool done = detail::evaluate_slots(pop, injected, inj_seeds, data, cfg.fitness, cfg.parallel_jobs, clock,
                                               cfg.time_budget_s);
      result.evaluations += injected.size();
      if (!done) {
        // Fill unevaluated immigrants so the population stays comparable.
        for (auto s : injected)
          if (!pop[s].evaluated) pop[s].report.fitness = kWorstFitness;
        result.stopped_by_budget = true;
        break;
      }
      history.assign(1, detail::make_trace(generation, pop, 0.0, 0).best.fitness);
    }

    // Breed the next generation.
    const auto order = ranking(pop);
    std::vector<Individual> next;
    next.reserve(pop.size());
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);
    while (next.size() < pop.size()) {
      const auto& pa = pop[tournament_select(pop, cfg.tournament_size, rng)];
      const auto& pb = pop[tournament_select(pop, cfg.tournament_size, rng)];
      PipelineGenome c1 = pa.genome, c2 = pb.genome;
      if (bernoulli(rng, cfg.p_crossover)) std::tie(c1, c2) = crossover(pa.genome, pb.genome, rng);
      for (auto* c : {&c1, &c2})
        if (bernoulli(rng, cfg.p_mutation)) *c = mutate(*c, rng, 1.0 / static_cast<double>(kGenomeGenes), space);
      for (auto* c : {&c1, &c2}) {
        if (next.size() == pop.size()) break;
        Individual child;
        child.genome = std::move(*c);
        child.key = serialize(child.genome);
        // An unchanged copy keeps its parent's evaluation.
        if (child.key == pa.key) {
          child.report = pa.report;
          child.evaluated = true;
        } else if (child.key == pb.key) {
          child.report = pb.report;
          child.evaluated = true;
        }
        next.push_back(std::move(child));
      }
    }

    ++generation;
    slots.clear();
    seeds.clear();
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (next[i].evaluated) continue;
      slots.push_back(i);
      seeds.push_back(evaluation_seed(cfg.seed, generation, i));
    }
    const bool done =
        detail::evaluate_slots(next, slots, seeds, data, cfg.fitness, cfg.parallel_jobs, clock, cfg.time_budget_s);
    result.evaluations += slots.size();
    if (!done) {
      result.stopped_by_budget = true;
      break;
    }
    pop = std::move(next);
    record(generation, injected.size());
    history.push_back(result.trace.back().best.fitness);
  }

  result.truncated = result.stopped_by_budget && result.trace.size() == 1;
  // Elitism keeps the best-ever individual in the population.
  const auto order = ranking(pop);
  result.best_genome = pop[order.front()].genome;
  result.best_report = pop[order.front()].report;
  result.elapsed_s = clock.elapsed();
  return result;
}

}  // namespace fairevo
