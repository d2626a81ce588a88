#pragma once

// Role-level fitness: a TF-IDF term contrasting a role's frequency in one
// pool against the whole corpus, a weighted TextRank term over the role
// co-occurrence graph, and their normalized blend aggregated per pattern.

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsg/error.hpp"
#include "nsg/event_model.hpp"
#include "nsg/textrank.hpp"

namespace nsg {

class MissingRole : public Error {
 public:
  explicit MissingRole(const std::string& role) : Error("role '" + role + "' is not present") {}
};

/// role -> number of patterns containing it
using RoleCounts = std::map<std::string, std::size_t, std::less<>>;
using RoleScores = std::map<std::string, double, std::less<>>;

RoleCounts count_roles(const PatternPool& pool);

struct RoleStats {
  std::vector<RoleCounts> pool_freq;  // one entry per input pool, same order
  RoleCounts global_freq;             // sum of pool_freq over all pools
  std::size_t pool_count = 0;         // N
};

RoleStats compute_role_stats(std::span<const PatternPool> pools);

/// (1 + ln pool_freq)^2 * ln(N / global_freq). Negative when global_freq > N.
double tfidf_value(std::size_t pool_freq, std::size_t global_freq, std::size_t pool_count);

/// TF-IDF of `role` with its frequency taken from `pool_freq` (the current
/// population) and its corpus frequency from `stats`. Throws MissingRole if
/// either count is absent.
double tfidf_score(std::string_view role, const RoleCounts& pool_freq, const RoleStats& stats);

/// Co-occurrence graph over the distinct roles of a pool (sorted); the edge
/// weight is the number of patterns containing both roles.
struct RoleGraph {
  std::vector<std::string> roles;
  WeightedGraph graph;
};

RoleGraph build_role_graph(const PatternPool& pool);

struct RoleTextRank {
  RoleScores scores;
  int iterations = 0;
  bool converged = false;
};

RoleTextRank textrank_scores(const RoleGraph& graph, const TextRankOptions& options = {});

struct FitnessOptions {
  double alpha = 0.5;
  double beta = 0.5;
  TextRankOptions textrank;

  /// Throws ConfigError unless alpha, beta >= 0, alpha + beta > 0 and the
  /// damping factor is in (0, 1).
  void validate() const;
};

struct FitnessTable {
  RoleScores tfidf;               // raw F per role
  RoleScores textrank;            // raw W per role
  RoleScores role_q;              // alpha * norm(F) + beta * norm(W), weights summing to 1
  std::vector<double> pattern_q;  // mean role_q, aligned with the scored patterns
  double alpha = 0.5;
  double beta = 0.5;
  double damping = 0.85;
  bool textrank_converged = true;
};

/// Min-max normalization to [0, 1]; a constant map becomes all 0.5.
RoleScores min_max_normalize(const RoleScores& raw);

/// Blends raw per-role scores into role and pattern fitness. Every role of
/// every pattern must appear in both maps.
FitnessTable combine_role_scores(const RoleScores& tfidf, const RoleScores& textrank,
                                 std::span<const EventPattern> patterns, double alpha, double beta);

/// Full fitness evaluation of a pool. Pool-local frequencies are counted on
/// `pool` itself; corpus frequencies come from `stats`.
FitnessTable combined_fitness(const PatternPool& pool, const RoleStats& stats, const FitnessOptions& options = {});

/// Mean role_q over the pattern's roles; 0 for a pattern without roles.
double pattern_fitness(const EventPattern& pattern, const RoleScores& role_q);

nlohmann::json fitness_to_json(const FitnessTable& table);
FitnessTable fitness_from_json(const nlohmann::json& j);

}  // namespace nsg
