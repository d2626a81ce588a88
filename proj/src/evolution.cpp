#include "nsg/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nsg {

using nlohmann::json;

void EvolutionConfig::validate() const {
  if (max_generations < 0) throw ConfigError("max_generations must be nonnegative");
  if (!(parent_fraction > 0.0 && parent_fraction <= 1.0)) throw ConfigError("parent_fraction must lie in (0, 1]");
  if (population_cap < 2) throw ConfigError("population_cap must be at least 2");
  if (parent_fraction * static_cast<double>(population_cap) < 2.0) {
    throw ConfigError("parent_fraction * population_cap must be at least 2");
  }
  fitness.validate();
}

std::vector<std::size_t> roulette_select(std::span<const double> fitness, std::size_t count, Rng& rng) {
  std::vector<std::size_t> picks;
  if (fitness.empty()) return picks;
  picks.reserve(count);

  std::vector<double> cumulative(fitness.size());
  double total = 0.0;
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    total += std::max(0.0, fitness[i]);
    cumulative[i] = total;
  }
  for (std::size_t n = 0; n < count; ++n) {
    if (!(total > 0.0)) {
      picks.push_back(static_cast<std::size_t>(rng.below(fitness.size())));
      continue;
    }
    const double u = rng.unit() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    picks.push_back(static_cast<std::size_t>(it - cumulative.begin()));
  }
  return picks;
}

namespace {

// k distinct positions out of n, by partial Fisher-Yates.
std::vector<std::size_t> choose_positions(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::vector<std::string> swap_roles(const std::vector<std::string>& own, const std::vector<std::size_t>& give,
                                    const std::vector<std::string>& other, const std::vector<std::size_t>& take) {
  std::vector<bool> removed(own.size(), false);
  for (std::size_t i : give) removed[i] = true;
  std::vector<std::string> roles;
  for (std::size_t i = 0; i < own.size(); ++i) {
    if (!removed[i]) roles.push_back(own[i]);
  }
  for (std::size_t i : take) roles.push_back(other[i]);
  return roles;
}

}  // namespace

std::pair<EventPattern, EventPattern> crossover(const EventPattern& a, const EventPattern& b, Rng& rng) {
  const std::size_t m = std::min(a.roles().size(), b.roles().size());
  if (m == 0 || a.roles() == b.roles()) return {a, b};

  const std::size_t k = 1 + static_cast<std::size_t>(rng.below(m));
  const auto from_a = choose_positions(a.roles().size(), k, rng);
  const auto from_b = choose_positions(b.roles().size(), k, rng);

  return {EventPattern::make(a.event_type(), swap_roles(a.roles(), from_a, b.roles(), from_b), PatternOrigin::crossover),
          EventPattern::make(b.event_type(), swap_roles(b.roles(), from_b, a.roles(), from_a), PatternOrigin::crossover)};
}

namespace {

std::vector<double> score_all(std::span<const EventPattern> patterns, const RoleScores& role_q) {
  std::vector<double> q;
  q.reserve(patterns.size());
  for (const EventPattern& p : patterns) q.push_back(pattern_fitness(p, role_q));
  return q;
}

// Indices ordered by fitness desc, then canonical serialization asc.
std::vector<std::size_t> rank_order(std::span<const EventPattern> patterns, const std::vector<double>& q) {
  std::vector<std::string> keys;
  keys.reserve(patterns.size());
  for (const EventPattern& p : patterns) keys.push_back(serialize_pattern(p));
  std::vector<std::size_t> order(patterns.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (q[x] != q[y]) return q[x] > q[y];
    return keys[x] < keys[y];
  });
  return order;
}

}  // namespace

PatternPool evolve_generation(const PatternPool& pool, const RoleScores& role_q, const EvolutionConfig& cfg,
                              Rng& rng) {
  const std::vector<double> q = score_all(pool.patterns, role_q);
  const double wanted = cfg.parent_fraction * static_cast<double>(pool.patterns.size());
  const auto parent_count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(wanted - 1e-9)));
  const std::vector<std::size_t> parents = roulette_select(q, parent_count, rng);

  // Pairs are formed in draw order; an unpaired last parent is copied through.
  std::vector<EventPattern> merged = pool.patterns;
  for (std::size_t i = 0; i + 1 < parents.size(); i += 2) {
    auto [x, y] = crossover(pool.patterns[parents[i]], pool.patterns[parents[i + 1]], rng);
    merged.push_back(std::move(x));
    merged.push_back(std::move(y));
  }
  if (parents.size() % 2 == 1) merged.push_back(pool.patterns[parents.back()]);
  merged = dedupe_patterns(merged);

  const std::vector<double> merged_q = score_all(merged, role_q);
  const std::vector<std::size_t> order = rank_order(merged, merged_q);

  PatternPool next;
  next.fragment_id = pool.fragment_id;
  next.generation = pool.generation + 1;
  const std::size_t keep = std::min(order.size(), cfg.population_cap);
  next.patterns.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) next.patterns.push_back(std::move(merged[order[i]]));
  return next;
}

EvolutionRun::EvolutionRun(PatternPool pool, const RoleStats& stats, EvolutionConfig cfg)
    : cfg_(std::move(cfg)),
      pool_(std::move(pool)),
      fitness_(combined_fitness(pool_, stats, cfg_.fitness)),
      rng_(derive_stream_seed(cfg_.seed, pool_.fragment_id)) {
  cfg_.validate();
  if (pool_.patterns.empty()) throw EmptyPool("cannot evolve an empty pool for '" + pool_.fragment_id + "'");
  record_generation();
}

EvolutionRun::EvolutionRun(EvolutionCheckpoint checkpoint, EvolutionConfig cfg)
    : cfg_(std::move(cfg)),
      pool_(std::move(checkpoint.pool)),
      fitness_(std::move(checkpoint.fitness)),
      rng_(checkpoint.stream_seed, checkpoint.draws),
      history_(std::move(checkpoint.history)),
      stopped_single_(checkpoint.stopped_single) {
  cfg_.validate();
  if (history_.size() != pool_.generation + 1) {
    throw ParseError(0, "checkpoint history does not match its generation counter");
  }
}

bool EvolutionRun::done() const {
  return stopped_single_ || pool_.generation >= static_cast<std::uint64_t>(cfg_.max_generations);
}

void EvolutionRun::record_generation() {
  const std::vector<double> q = score_all(pool_.patterns, fitness_.role_q);
  GenerationStats s;
  s.population = q.size();
  s.best_q = *std::max_element(q.begin(), q.end());
  s.mean_q = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
  history_.push_back(s);
  if (pool_.patterns.size() == 1 && !done()) stopped_single_ = true;
}

void EvolutionRun::step() {
  if (done()) return;
  pool_ = evolve_generation(pool_, fitness_.role_q, cfg_, rng_);
  record_generation();
}

void EvolutionRun::run_to_end() {
  while (!done()) step();
}

EvolutionCheckpoint EvolutionRun::checkpoint() const {
  EvolutionCheckpoint cp;
  cp.pool = pool_;
  cp.fitness = fitness_;
  cp.fitness.pattern_q = score_all(pool_.patterns, fitness_.role_q);
  cp.stream_seed = rng_.seed();
  cp.draws = rng_.draws();
  cp.history = history_;
  cp.stopped_single = stopped_single_;
  return cp;
}

EvolutionResult EvolutionRun::result() const {
  const std::vector<double> q = score_all(pool_.patterns, fitness_.role_q);
  const std::size_t best = rank_order(pool_.patterns, q).front();
  return EvolutionResult{pool_.fragment_id, pool_.patterns[best], q[best], history_,
                         static_cast<int>(pool_.generation), stopped_single_};
}

EvolutionResult evolve(const PatternPool& pool, const RoleStats& stats, const EvolutionConfig& cfg) {
  EvolutionRun run(pool, stats, cfg);
  run.run_to_end();
  return run.result();
}

namespace {

json history_to_json(const std::vector<GenerationStats>& history) {
  json out = json::array();
  for (const GenerationStats& g : history) {
    out.push_back(json{{"best_q", g.best_q}, {"mean_q", g.mean_q}, {"population", g.population}});
  }
  return out;
}

std::vector<GenerationStats> history_from_json(const json& j) {
  std::vector<GenerationStats> out;
  for (const json& g : j) {
    out.push_back({g.at("best_q").get<double>(), g.at("mean_q").get<double>(), g.at("population").get<std::size_t>()});
  }
  return out;
}

}  // namespace

json checkpoint_to_json(const EvolutionCheckpoint& cp) {
  json j = pool_to_json(cp.pool);
  j["fitness"] = fitness_to_json(cp.fitness);
  j["rng"] = json{{"seed", cp.stream_seed}, {"draws", cp.draws}};
  j["history"] = history_to_json(cp.history);
  j["stopped_single"] = cp.stopped_single;
  return j;
}

EvolutionCheckpoint checkpoint_from_json(const json& j) {
  EvolutionCheckpoint cp;
  cp.pool = pool_from_json(j);
  try {
    cp.fitness = fitness_from_json(j.at("fitness"));
    cp.stream_seed = j.at("rng").at("seed").get<std::uint64_t>();
    cp.draws = j.at("rng").at("draws").get<std::uint64_t>();
    cp.history = history_from_json(j.at("history"));
    cp.stopped_single = j.at("stopped_single").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed evolution checkpoint: ") + e.what());
  }
  return cp;
}

json result_to_json(const EvolutionResult& r) {
  return json{{"fragment_id", r.fragment_id},
              {"best", pattern_to_json(r.best)},
              {"best_pattern", serialize_pattern(r.best)},
              {"best_fitness", r.best_fitness},
              {"generations_run", r.generations_run},
              {"stopped_single", r.stopped_single},
              {"history", history_to_json(r.history)}};
}

EvolutionResult result_from_json(const json& j) {
  try {
    return EvolutionResult{j.at("fragment_id").get<std::string>(),
                           pattern_from_json(j.at("best")),
                           j.at("best_fitness").get<double>(),
                           history_from_json(j.at("history")),
                           j.at("generations_run").get<int>(),
                           j.at("stopped_single").get<bool>()};
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed evolution result: ") + e.what());
  }
}

}  // namespace nsg
