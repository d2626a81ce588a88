#include <doctest.h>

#include <cmath>

#include "nsg/baselines.hpp"
#include "nsg/report.hpp"
#include "oracles.hpp"

using namespace nsg;

namespace {

Corpus fixture() {
  return Corpus::from_fragments({
      {"f1", "t", "Alpha beta gamma. Beta beta. Delta epsilon alpha.", std::nullopt},
      {"f2", "t", "Alpha beta.", std::nullopt},
      {"f3", "t", "Alpha zeta.", std::nullopt},
  });
}

}  // namespace

TEST_CASE("document frequency over bodies") {
  const DocumentFrequency df(fixture());
  CHECK(df.documents() == 3);
  CHECK(df.df("alpha") == 3);
  CHECK(df.df("beta") == 2);
  CHECK(df.df("zeta") == 1);
  CHECK(df.df("t") == 0);
  CHECK(df.idf("alpha") == 0.0);
  CHECK(df.idf("unseen") == doctest::Approx(std::log(3.0)));
}

TEST_CASE("hand-ranked tfidf fixture") {
  const Corpus c = fixture();
  const DocumentFrequency df(c);
  const auto sentences = split_sentences(c.fragments()[0].body);
  REQUIRE(sentences.size() == 3);
  const double idf_beta = std::log(3.0 / 2.0);
  const double idf_rare = std::log(3.0);
  const auto scores = tfidf_sentence_scores(sentences, df);
  CHECK(scores[0] == doctest::Approx((0.0 + idf_beta + idf_rare) / 3.0).epsilon(1e-12));
  CHECK(scores[1] == doctest::Approx(2.0 * idf_beta).epsilon(1e-12));
  CHECK(scores[2] == doctest::Approx((idf_rare + idf_rare + 0.0) / 3.0).epsilon(1e-12));
  // Manual ranking: sentence 2 > sentence 3 > sentence 1.
  CHECK(top_sentences(scores, 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(top_sentences(scores, 1) == std::vector<std::size_t>{1});
  CHECK(top_sentences(scores, 2) == std::vector<std::size_t>{1, 2});

  CHECK(baseline_tfidf_summary(c.fragments()[0], df).summary == "Beta beta.");
  CHECK(baseline_tfidf_summary(c.fragments()[0], df, 2).summary == "Beta beta. Delta epsilon alpha.");
  CHECK(baseline_tfidf_summary(c.fragments()[0], df, 9).summary == c.fragments()[0].body);
}

TEST_CASE("top sentences breaks ties toward earlier sentences") {
  CHECK(top_sentences({1.0, 2.0, 2.0, 0.5}, 1) == std::vector<std::size_t>{1});
  CHECK(top_sentences({1.0, 1.0, 1.0}, 2) == std::vector<std::size_t>{0, 1});
  CHECK(top_sentences({}, 3).empty());
}

TEST_CASE("single-sentence body returns that sentence") {
  const Corpus c = Corpus::from_fragments({{"s", "t", "  Only one sentence here.  ", std::nullopt}});
  const DocumentFrequency df(c);
  const auto a = baseline_tfidf_summary(c.fragments()[0], df);
  const auto b = baseline_textrank_summary(c.fragments()[0]);
  CHECK(a.summary == "Only one sentence here.");
  CHECK(b.summary == "Only one sentence here.");
  CHECK(a.system == SystemLabel::tfidf_baseline);
  CHECK(b.system == SystemLabel::textrank_baseline);
  CHECK_FALSE(a.guiding_pattern);
}

TEST_CASE("extractive output overlaps its source completely") {
  const Corpus c = fixture();
  const DocumentFrequency df(c);
  for (const auto& f : c.fragments()) {
    for (const auto& r : {baseline_tfidf_summary(f, df), baseline_textrank_summary(f)}) {
      const auto cand = tokenize(r.summary);
      if (cand.size() >= 2) CHECK(score_summary(r.summary, f).overlap_pct == 100.0);
    }
  }
}

TEST_CASE("sentence similarity") {
  CHECK(sentence_similarity({"a", "b"}, {"b", "c"}) == doctest::Approx(1.0 / (2.0 * std::log(2.0))));
  CHECK(sentence_similarity({"a"}, {"a"}) == 0.0);
  CHECK(sentence_similarity({}, {"a", "b"}) == 0.0);
  CHECK(sentence_similarity({"a", "a", "b"}, {"a", "c"}) == doctest::Approx(1.0 / (std::log(3.0) + std::log(2.0))));
}

TEST_CASE("identical pair outranks an unrelated sentence") {
  const std::vector<std::string> sentences{"Markets closed higher on Friday.", "Rain fell over the city.",
                                           "Rain fell over the city."};
  const auto scores = textrank_sentence_scores(sentences);
  std::vector<std::vector<double>> w(3, std::vector<double>(3, 0.0));
  const double s = sentence_similarity(tokenize(sentences[1]), tokenize(sentences[2]));
  w[1][2] = w[2][1] = s;
  const auto expected = oracle::textrank_power(w, 0.85);
  for (std::size_t i = 0; i < 3; ++i) CHECK(scores[i] == doctest::Approx(expected[i]).epsilon(1e-5));
  CHECK(scores[1] > scores[0]);
  CHECK(top_sentences(scores, 1) == std::vector<std::size_t>{1});
  const NewsFragment f{"x", "t", sentences[0] + " " + sentences[1] + " " + sentences[2], std::nullopt};
  CHECK(baseline_textrank_summary(f).summary == "Rain fell over the city.");
  CHECK(baseline_textrank_summary(f).summary == baseline_textrank_summary(f).summary);
}

TEST_CASE("zero max_sentences is rejected") {
  const Corpus c = fixture();
  CHECK_THROWS_AS(baseline_textrank_summary(c.fragments()[0], 0), ConfigError);
}
