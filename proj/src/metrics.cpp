#include "nsg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nsg {

NgramCounts ngram_counts(const TokenSequence& tokens, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

PRF make_prf(double matches, double candidate_total, double reference_total) {
  PRF r;
  r.precision = candidate_total > 0.0 ? matches / candidate_total : 0.0;
  r.recall = reference_total > 0.0 ? matches / reference_total : 0.0;
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

std::pair<std::size_t, std::size_t> clipped_matches(const TokenSequence& candidate, const TokenSequence& reference,
                                                    std::size_t n) {
  const NgramCounts cand = ngram_counts(candidate, n);
  const NgramCounts ref = ngram_counts(reference, n);
  std::size_t matches = 0;
  std::size_t total = 0;
  for (const auto& [gram, c] : cand) {
    total += c;
    if (auto it = ref.find(gram); it != ref.end()) matches += std::min(c, it->second);
  }
  return {matches, total};
}

PRF rouge_n(const TokenSequence& candidate, const TokenSequence& reference, std::size_t n) {
  const auto [matches, cand_total] = clipped_matches(candidate, reference, n);
  const std::size_t ref_total = reference.size() >= n && n > 0 ? reference.size() - n + 1 : 0;
  return make_prf(static_cast<double>(matches), static_cast<double>(cand_total), static_cast<double>(ref_total));
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PRF rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  return make_prf(static_cast<double>(lcs_length(candidate, reference)), static_cast<double>(candidate.size()),
                  static_cast<double>(reference.size()));
}

std::vector<double> bleu(const TokenSequence& candidate, const TokenSequence& reference, const BleuOptions& options) {
  std::vector<double> scores(options.max_n, 0.0);
  if (candidate.empty() || options.max_n == 0) return scores;

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);

  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 1; n <= options.max_n; ++n) {
    auto [matches, total] = clipped_matches(candidate, reference, n);
    double p = 0.0;
    if (options.smoothing && n >= 2) {
      p = (static_cast<double>(matches) + 1.0) / (static_cast<double>(total) + 1.0);
    } else if (total > 0) {
      p = static_cast<double>(matches) / static_cast<double>(total);
    }
    if (p <= 0.0) zero = true;
    if (!zero) log_sum += std::log(p);
    scores[n - 1] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n));
  }
  return scores;
}

double overlap_pct(const TokenSequence& candidate, const TokenSequence& source) {
  if (candidate.size() < 2) return 0.0;
  std::set<std::pair<std::string_view, std::string_view>> source_bigrams;
  for (std::size_t i = 0; i + 1 < source.size(); ++i) source_bigrams.emplace(source[i], source[i + 1]);
  std::set<std::pair<std::string_view, std::string_view>> distinct;
  for (std::size_t i = 0; i + 1 < candidate.size(); ++i) distinct.emplace(candidate[i], candidate[i + 1]);
  std::size_t hits = 0;
  for (const auto& g : distinct) hits += source_bigrams.count(g);
  return 100.0 * static_cast<double>(hits) / static_cast<double>(distinct.size());
}

}  // namespace nsg
