#include "nsg/textrank.hpp"

#include <algorithm>
#include <cmath>

namespace nsg {

WeightedGraph::WeightedGraph(std::size_t nodes) : n_(nodes), w_(nodes * nodes, 0.0) {}

void WeightedGraph::add_weight(std::size_t i, std::size_t j, double w) {
  if (i == j || !(w > 0.0)) return;
  w_[i * n_ + j] += w;
  w_[j * n_ + i] += w;
}

double WeightedGraph::strength(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += w_[i * n_ + j];
  return s;
}

std::size_t WeightedGraph::edge_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (w_[i * n_ + j] > 0.0) ++count;
    }
  }
  return count;
}

TextRankResult textrank(const WeightedGraph& graph, const TextRankOptions& options) {
  const std::size_t n = graph.size();
  TextRankResult result;
  result.scores.assign(n, 1.0);
  if (n == 0) {
    result.converged = true;
    return result;
  }

  std::vector<double> strength(n);
  for (std::size_t j = 0; j < n; ++j) strength[j] = graph.strength(j);

  const double d = options.damping;
  std::vector<double> next(n);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    double max_delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double w = graph.weight(j, i);
        if (w > 0.0) acc += w / strength[j] * result.scores[j];
      }
      next[i] = (1.0 - d) + d * acc;
      max_delta = std::max(max_delta, std::abs(next[i] - result.scores[i]));
    }
    result.scores.swap(next);
    result.iterations = iter;
    if (max_delta < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace nsg
