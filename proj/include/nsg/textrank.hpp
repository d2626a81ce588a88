#pragma once

#include <cstddef>
#include <vector>

namespace nsg {

/// Undirected graph with positive symmetric edge weights and no self-loops.
/// Dense storage; graphs here are small (roles of one pool, sentences of one
/// article).
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t nodes = 0);

  std::size_t size() const noexcept { return n_; }

  /// Adds `w` to edge {i, j}. Ignores self-loops and non-positive weights.
  void add_weight(std::size_t i, std::size_t j, double w);
  double weight(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  /// Sum of edge weights at node i.
  double strength(std::size_t i) const;
  std::size_t edge_count() const;

 private:
  std::size_t n_;
  std::vector<double> w_;
};

struct TextRankOptions {
  double damping = 0.85;
  double tolerance = 1e-6;
  int max_iterations = 100;
};

struct TextRankResult {
  std::vector<double> scores;
  int iterations = 0;
  bool converged = false;
};

/// Weighted TextRank by synchronous power iteration from all-ones:
///   W(i) = (1 - d) + d * sum_j  w_ji / strength(j) * W(j)
/// Stops when the largest per-node change drops below `tolerance` or after
/// `max_iterations`; `converged` reports which.
TextRankResult textrank(const WeightedGraph& graph, const TextRankOptions& options = {});

}  // namespace nsg
