#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "nsg/corpus.hpp"
#include "nsg/llm_gateway.hpp"
#include "nsg/textrank.hpp"

namespace nsg {

/// Document frequencies over fragment bodies: each fragment is one document.
class DocumentFrequency {
 public:
  explicit DocumentFrequency(const Corpus& corpus);

  std::size_t documents() const noexcept { return documents_; }
  std::size_t df(const std::string& token) const;
  /// ln(N / max(df, 1)).
  double idf(const std::string& token) const;

 private:
  std::size_t documents_ = 0;
  std::map<std::string, std::size_t, std::less<>> df_;
};

/// Mean tf*idf over the distinct tokens of each sentence; 0 for a sentence
/// without tokens.
std::vector<double> tfidf_sentence_scores(const std::vector<std::string>& sentences, const DocumentFrequency& df);

/// Token-overlap similarity |Si ∩ Sj| / (ln|Si| + ln|Sj|) on distinct
/// tokens, 0 when the denominator is not positive.
double sentence_similarity(const TokenSequence& a, const TokenSequence& b);

std::vector<double> textrank_sentence_scores(const std::vector<std::string>& sentences,
                                             const TextRankOptions& options = {});

/// Indices of the `k` best scores, ties to the earlier sentence, returned in
/// ascending order.
std::vector<std::size_t> top_sentences(const std::vector<double>& scores, std::size_t k);

SummaryRecord baseline_tfidf_summary(const NewsFragment& fragment, const DocumentFrequency& df,
                                     std::size_t max_sentences = 1);
SummaryRecord baseline_textrank_summary(const NewsFragment& fragment, std::size_t max_sentences = 1,
                                        const TextRankOptions& options = {});

}  // namespace nsg
