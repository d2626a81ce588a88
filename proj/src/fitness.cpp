#include "nsg/fitness.hpp"

#include <algorithm>
#include <cmath>

namespace nsg {

using nlohmann::json;

RoleCounts count_roles(const PatternPool& pool) {
  RoleCounts counts;
  for (const EventPattern& p : pool.patterns) {
    for (const std::string& r : p.roles()) ++counts[r];
  }
  return counts;
}

RoleStats compute_role_stats(std::span<const PatternPool> pools) {
  RoleStats stats;
  stats.pool_count = pools.size();
  stats.pool_freq.reserve(pools.size());
  for (const PatternPool& pool : pools) {
    RoleCounts local = count_roles(pool);
    for (const auto& [role, n] : local) stats.global_freq[role] += n;
    stats.pool_freq.push_back(std::move(local));
  }
  return stats;
}

double tfidf_value(std::size_t pool_freq, std::size_t global_freq, std::size_t pool_count) {
  const double tf = 1.0 + std::log(static_cast<double>(pool_freq));
  return tf * tf * std::log(static_cast<double>(pool_count) / static_cast<double>(global_freq));
}

double tfidf_score(std::string_view role, const RoleCounts& pool_freq, const RoleStats& stats) {
  auto local = pool_freq.find(role);
  auto global = stats.global_freq.find(role);
  if (local == pool_freq.end() || local->second == 0 || global == stats.global_freq.end() ||
      global->second == 0) {
    throw MissingRole(std::string(role));
  }
  return tfidf_value(local->second, global->second, stats.pool_count);
}

RoleGraph build_role_graph(const PatternPool& pool) {
  RoleGraph g;
  for (const auto& [role, n] : count_roles(pool)) g.roles.push_back(role);
  g.graph = WeightedGraph(g.roles.size());
  auto index = [&](const std::string& r) {
    return static_cast<std::size_t>(std::lower_bound(g.roles.begin(), g.roles.end(), r) - g.roles.begin());
  };
  for (const EventPattern& p : pool.patterns) {
    const auto& roles = p.roles();
    for (std::size_t a = 0; a < roles.size(); ++a) {
      for (std::size_t b = a + 1; b < roles.size(); ++b) g.graph.add_weight(index(roles[a]), index(roles[b]), 1.0);
    }
  }
  return g;
}

RoleTextRank textrank_scores(const RoleGraph& graph, const TextRankOptions& options) {
  const TextRankResult tr = textrank(graph.graph, options);
  RoleTextRank out;
  out.iterations = tr.iterations;
  out.converged = tr.converged;
  for (std::size_t i = 0; i < graph.roles.size(); ++i) out.scores.emplace(graph.roles[i], tr.scores[i]);
  return out;
}

void FitnessOptions::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(alpha + beta > 0.0)) {
    throw ConfigError("fitness weights need alpha >= 0, beta >= 0 and alpha + beta > 0");
  }
  if (!(textrank.damping > 0.0 && textrank.damping < 1.0)) throw ConfigError("damping factor must lie in (0, 1)");
  if (!(textrank.tolerance > 0.0)) throw ConfigError("textrank tolerance must be positive");
  if (textrank.max_iterations <= 0) throw ConfigError("textrank max_iterations must be positive");
}

RoleScores min_max_normalize(const RoleScores& raw) {
  RoleScores out;
  if (raw.empty()) return out;
  auto [lo, hi] = std::minmax_element(raw.begin(), raw.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  const double min = lo->second;
  const double span = hi->second - min;
  for (const auto& [role, v] : raw) out.emplace(role, span > 0.0 ? (v - min) / span : 0.5);
  return out;
}

double pattern_fitness(const EventPattern& pattern, const RoleScores& role_q) {
  if (pattern.roles().empty()) return 0.0;
  double sum = 0.0;
  for (const std::string& r : pattern.roles()) {
    auto it = role_q.find(r);
    if (it == role_q.end()) throw MissingRole(r);
    sum += it->second;
  }
  return sum / static_cast<double>(pattern.roles().size());
}

FitnessTable combine_role_scores(const RoleScores& tfidf, const RoleScores& textrank_raw,
                                 std::span<const EventPattern> patterns, double alpha, double beta) {
  FitnessTable t;
  t.tfidf = tfidf;
  t.textrank = textrank_raw;
  const double total = alpha + beta;
  t.alpha = alpha / total;
  t.beta = beta / total;

  const RoleScores f_hat = min_max_normalize(tfidf);
  const RoleScores w_hat = min_max_normalize(textrank_raw);
  for (const auto& [role, f] : f_hat) {
    auto w = w_hat.find(role);
    if (w == w_hat.end()) throw MissingRole(role);
    t.role_q.emplace(role, t.alpha * f + t.beta * w->second);
  }
  t.pattern_q.reserve(patterns.size());
  for (const EventPattern& p : patterns) t.pattern_q.push_back(pattern_fitness(p, t.role_q));
  return t;
}

FitnessTable combined_fitness(const PatternPool& pool, const RoleStats& stats, const FitnessOptions& options) {
  options.validate();
  const RoleCounts local = count_roles(pool);
  RoleScores tfidf;
  for (const auto& [role, n] : local) tfidf.emplace(role, tfidf_score(role, local, stats));
  const RoleTextRank tr = textrank_scores(build_role_graph(pool), options.textrank);

  FitnessTable t = combine_role_scores(tfidf, tr.scores, pool.patterns, options.alpha, options.beta);
  t.damping = options.textrank.damping;
  t.textrank_converged = tr.converged;
  return t;
}

json fitness_to_json(const FitnessTable& table) {
  json roles = json::object();
  for (const auto& [role, q] : table.role_q) {
    roles[role] = json{{"F", table.tfidf.at(role)}, {"W", table.textrank.at(role)}, {"Q", q}};
  }
  return json{{"alpha", table.alpha},
              {"beta", table.beta},
              {"damping", table.damping},
              {"textrank_converged", table.textrank_converged},
              {"roles", std::move(roles)},
              {"pattern_q", table.pattern_q}};
}

FitnessTable fitness_from_json(const json& j) {
  FitnessTable t;
  try {
    t.alpha = j.at("alpha").get<double>();
    t.beta = j.at("beta").get<double>();
    t.damping = j.at("damping").get<double>();
    t.textrank_converged = j.at("textrank_converged").get<bool>();
    for (const auto& [role, v] : j.at("roles").items()) {
      t.tfidf.emplace(role, v.at("F").get<double>());
      t.textrank.emplace(role, v.at("W").get<double>());
      t.role_q.emplace(role, v.at("Q").get<double>());
    }
    t.pattern_q = j.at("pattern_q").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed fitness table: ") + e.what());
  }
  return t;
}

}  // namespace nsg
