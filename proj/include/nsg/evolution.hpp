#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nsg/event_model.hpp"
#include "nsg/fitness.hpp"
#include "nsg/rng.hpp"

namespace nsg {

struct EvolutionConfig {
  int max_generations = 50;     // I
  double parent_fraction = 0.5;
  std::size_t population_cap = 32;
  std::uint64_t seed = 0;
  FitnessOptions fitness;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct GenerationStats {
  double best_q = 0.0;
  double mean_q = 0.0;
  std::size_t population = 0;

  friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

struct EvolutionResult {
  std::string fragment_id;
  EventPattern best;
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;  // generation 0 included
  int generations_run = 0;
  /// True when evolution ended early because one individual remained.
  bool stopped_single = false;
};

/// Fitness-proportionate sampling with replacement. Returns `count` indices
/// into `fitness`; uniform when every value is zero. Values must be >= 0.
std::vector<std::size_t> roulette_select(std::span<const double> fitness, std::size_t count, Rng& rng);

/// Swaps k random roles between two parents, k uniform in 1..min(|a|, |b|).
/// Event types are inherited; offspring carry origin=crossover. Parents with
/// identical role sets, or a parent without roles, come back unchanged.
std::pair<EventPattern, EventPattern> crossover(const EventPattern& a, const EventPattern& b, Rng& rng);

/// One generation: roulette parent selection, pairwise crossover, merge with
/// the whole parent population, dedupe, and truncation to the population cap
/// by (fitness desc, canonical serialization asc). The returned pool is in
/// that order and its generation is one higher.
///
/// `role_q` scores every role that can occur in the pool.
PatternPool evolve_generation(const PatternPool& pool, const RoleScores& role_q, const EvolutionConfig& cfg,
                              Rng& rng);

/// Resumable state of one pool's evolution.
struct EvolutionCheckpoint {
  PatternPool pool;
  FitnessTable fitness;  // role table fixed at generation 0
  std::uint64_t stream_seed = 0;
  std::uint64_t draws = 0;
  std::vector<GenerationStats> history;
  bool stopped_single = false;
};

nlohmann::json checkpoint_to_json(const EvolutionCheckpoint& cp);
EvolutionCheckpoint checkpoint_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const EvolutionResult& r);
EvolutionResult result_from_json(const nlohmann::json& j);

/// Stepwise driver over one pool. Role scores are computed once from the
/// generation-0 pool against `stats`, so a pattern's fitness does not change
/// while it survives.
class EvolutionRun {
 public:
  EvolutionRun(PatternPool pool, const RoleStats& stats, EvolutionConfig cfg);
  EvolutionRun(EvolutionCheckpoint checkpoint, EvolutionConfig cfg);

  bool done() const;
  void step();
  void run_to_end();

  const PatternPool& pool() const noexcept { return pool_; }
  const FitnessTable& fitness() const noexcept { return fitness_; }
  EvolutionCheckpoint checkpoint() const;
  EvolutionResult result() const;

 private:
  void record_generation();

  EvolutionConfig cfg_;
  PatternPool pool_;
  FitnessTable fitness_;
  Rng rng_;
  std::vector<GenerationStats> history_;
  bool stopped_single_ = false;
};

/// Runs `cfg.max_generations` generations (fewer only if the pool shrinks to
/// one individual) and returns the fittest pattern.
EvolutionResult evolve(const PatternPool& pool, const RoleStats& stats, const EvolutionConfig& cfg);

}  // namespace nsg
