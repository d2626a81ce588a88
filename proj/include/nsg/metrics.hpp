#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "nsg/corpus.hpp"

namespace nsg {

using Ngram = std::vector<std::string>;
using NgramCounts = std::map<Ngram, std::size_t>;

/// Contiguous n-grams with multiplicity; empty when the input is shorter than n.
NgramCounts ngram_counts(const TokenSequence& tokens, std::size_t n);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const PRF&, const PRF&) = default;
};

/// Builds a PRF from match counts; any 0/0 ratio is 0.
PRF make_prf(double matches, double candidate_total, double reference_total);

PRF rouge_n(const TokenSequence& candidate, const TokenSequence& reference, std::size_t n);
PRF rouge_l(const TokenSequence& candidate, const TokenSequence& reference);
std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);

struct BleuOptions {
  std::size_t max_n = 4;
  /// Add-one smoothing of the modified precisions of order >= 2.
  bool smoothing = false;
};

/// Clipped modified precision of order n: (matches, candidate n-gram total).
std::pair<std::size_t, std::size_t> clipped_matches(const TokenSequence& candidate, const TokenSequence& reference,
                                                    std::size_t n);

/// Cumulative BLEU-1..BLEU-max_n with brevity penalty, single reference.
std::vector<double> bleu(const TokenSequence& candidate, const TokenSequence& reference,
                         const BleuOptions& options = {});

/// Percentage of the candidate's distinct bigrams that also occur in `source`.
/// 0 for a candidate with fewer than two tokens.
double overlap_pct(const TokenSequence& candidate, const TokenSequence& source);

}  // namespace nsg
