#include "nsg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "nsg/text.hpp"

namespace nsg {

DocumentFrequency::DocumentFrequency(const Corpus& corpus) : documents_(corpus.size()) {
  for (const NewsFragment& f : corpus.fragments()) {
    const TokenSequence tokens = tokenize(f.body);
    for (const std::string& t : std::set<std::string>(tokens.begin(), tokens.end())) ++df_[t];
  }
}

std::size_t DocumentFrequency::df(const std::string& token) const {
  const auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double DocumentFrequency::idf(const std::string& token) const {
  if (documents_ == 0) return 0.0;
  return std::log(static_cast<double>(documents_) / static_cast<double>(std::max<std::size_t>(df(token), 1)));
}

std::vector<double> tfidf_sentence_scores(const std::vector<std::string>& sentences, const DocumentFrequency& df) {
  std::vector<double> scores;
  scores.reserve(sentences.size());
  for (const std::string& s : sentences) {
    std::map<std::string, std::size_t> tf;
    for (std::string& t : tokenize(s)) ++tf[std::move(t)];
    double sum = 0.0;
    for (const auto& [token, count] : tf) sum += static_cast<double>(count) * df.idf(token);
    scores.push_back(tf.empty() ? 0.0 : sum / static_cast<double>(tf.size()));
  }
  return scores;
}

double sentence_similarity(const TokenSequence& a, const TokenSequence& b) {
  const double denom = std::log(static_cast<double>(a.size())) + std::log(static_cast<double>(b.size()));
  if (a.empty() || b.empty() || !(denom > 0.0)) return 0.0;
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  std::size_t common = 0;
  for (const std::string& t : sa) common += sb.count(t);
  return static_cast<double>(common) / denom;
}

std::vector<double> textrank_sentence_scores(const std::vector<std::string>& sentences,
                                             const TextRankOptions& options) {
  std::vector<TokenSequence> tokens;
  tokens.reserve(sentences.size());
  for (const std::string& s : sentences) tokens.push_back(tokenize(s));
  WeightedGraph graph(sentences.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) graph.add_weight(i, j, sentence_similarity(tokens[i], tokens[j]));
  }
  return textrank(graph, options).scores;
}

std::vector<std::size_t> top_sentences(const std::vector<double>& scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

namespace {

SummaryRecord assemble(const NewsFragment& fragment, SystemLabel system, const std::vector<std::string>& sentences,
                       const std::vector<double>& scores, std::size_t max_sentences) {
  if (max_sentences == 0) throw ConfigError("baseline.max_sentences must be positive");
  std::string summary;
  for (std::size_t i : top_sentences(scores, max_sentences)) {
    if (!summary.empty()) summary += ' ';
    summary += sentences[i];
  }
  SummaryRecord r{fragment.id, system, summary.empty() ? text::trim(fragment.body) : summary, std::nullopt};
  r.validate();
  return r;
}

}  // namespace

SummaryRecord baseline_tfidf_summary(const NewsFragment& fragment, const DocumentFrequency& df,
                                     std::size_t max_sentences) {
  const std::vector<std::string> sentences = split_sentences(fragment.body);
  return assemble(fragment, SystemLabel::tfidf_baseline, sentences, tfidf_sentence_scores(sentences, df),
                  max_sentences);
}

SummaryRecord baseline_textrank_summary(const NewsFragment& fragment, std::size_t max_sentences,
                                        const TextRankOptions& options) {
  const std::vector<std::string> sentences = split_sentences(fragment.body);
  return assemble(fragment, SystemLabel::textrank_baseline, sentences, textrank_sentence_scores(sentences, options),
                  max_sentences);
}

}  // namespace nsg
