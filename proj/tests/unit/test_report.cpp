#include <doctest.h>

#include <algorithm>
#include <random>

#include "nsg/report.hpp"
#include "oracles.hpp"

using namespace nsg;

namespace {

Corpus corpus() {
  return Corpus::from_fragments({
      {"a", "River floods town", "Heavy rain made the river flood the town. Residents left.", std::nullopt},
      {"b", "Bank reports loss", "The bank reports a loss for the quarter. Shares fell.", std::nullopt},
      {"c", "Team wins final", "The home team wins the final in extra time.", std::nullopt},
  });
}

std::vector<SummaryRecord> records() {
  return {
      {"a", SystemLabel::tfidf_baseline, "Heavy rain made the river flood the town.", std::nullopt},
      {"b", SystemLabel::tfidf_baseline, "The bank reports a loss for the quarter.", std::nullopt},
      {"c", SystemLabel::tfidf_baseline, "The home team wins the final in extra time.", std::nullopt},
      {"a", SystemLabel::glm_direct, "river floods town", std::nullopt},
      {"b", SystemLabel::glm_direct, "bank loss", std::nullopt},
      {"c", SystemLabel::glm_direct, "final won", std::nullopt},
  };
}

}  // namespace

TEST_CASE("candidate equal to the title scores 1") {
  const NewsFragment f{"x", "Storm hits the coast", "A storm hits the coast. Damage is light.", std::nullopt};
  const SummaryScores s = score_summary(f.title, f);
  CHECK(s.rouge1 == PRF{1, 1, 1});
  CHECK(s.rouge2 == PRF{1, 1, 1});
  CHECK(s.rougeL == PRF{1, 1, 1});
  for (double b : s.bleu) CHECK(b == doctest::Approx(1.0));
  // Title bigrams: storm hits, hits the, the coast; all occur in the body.
  CHECK(s.overlap_pct == doctest::Approx(100.0));

  const NewsFragment g{"y", "Storm hits the coast", "Storm damage was light on the coast.", std::nullopt};
  // Only "the coast" occurs in the body.
  CHECK(score_summary(g.title, g).overlap_pct == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("overlap comparand switch") {
  const NewsFragment f{"x", "quiet day", "Markets were calm. Traders left early.", std::nullopt};
  EvaluateOptions o;
  CHECK(score_summary("quiet day", f, o).overlap_pct == 0.0);
  o.overlap_against = OverlapComparand::reference;
  CHECK(score_summary("quiet day", f, o).overlap_pct == 100.0);
}

TEST_CASE("evaluate aggregates means per system") {
  const Corpus c = corpus();
  const auto recs = records();
  const EvaluationReport r = evaluate(recs, c);
  REQUIRE(r.systems.size() == 2);
  CHECK(r.breakdown.size() == recs.size());
  CHECK(r.systems.at("tfidf_baseline").fragments == 3);
  double sum = 0.0;
  for (const auto& f : r.breakdown) {
    if (f.system == "glm_direct") sum += f.scores.rouge1.f1;
  }
  CHECK(r.systems.at("glm_direct").mean.rouge1.f1 == doctest::Approx(sum / 3.0));
  CHECK(r.systems.at("tfidf_baseline").mean.overlap_pct == doctest::Approx(100.0));
  CHECK(r.breakdown.front().fragment_id == "a");
  CHECK(r.breakdown.front().system == "glm_direct");
}

TEST_CASE("each record appears exactly once in the breakdown") {
  const auto recs = records();
  const EvaluationReport r = evaluate(recs, corpus());
  for (const SummaryRecord& rec : recs) {
    const auto n = std::count_if(r.breakdown.begin(), r.breakdown.end(), [&](const FragmentScore& f) {
      return f.fragment_id == rec.fragment_id && f.system == to_string(rec.system);
    });
    CHECK(n == 1);
  }
}

TEST_CASE("evaluate is permutation invariant") {
  const Corpus c = corpus();
  auto recs = records();
  const EvaluationReport base = evaluate(recs, c);
  std::mt19937_64 gen(3);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(recs.begin(), recs.end(), gen);
    CHECK(evaluate(recs, c) == base);
    CHECK(emit_report(evaluate(recs, c), ReportFormat::json) == emit_report(base, ReportFormat::json));
  }
}

TEST_CASE("two systems with the same summaries get identical rows") {
  const Corpus c = corpus();
  std::vector<SummaryRecord> recs;
  for (const auto& f : c.fragments()) {
    recs.push_back({f.id, SystemLabel::tfidf_baseline, f.title + " today", std::nullopt});
    recs.push_back({f.id, SystemLabel::textrank_baseline, f.title + " today", std::nullopt});
  }
  const auto r = evaluate(recs, c);
  CHECK(r.systems.at("tfidf_baseline") == r.systems.at("textrank_baseline"));
}

TEST_CASE("unknown fragment and duplicates") {
  const Corpus c = corpus();
  const std::vector<SummaryRecord> unknown{{"zzz", SystemLabel::mock, "x", std::nullopt}};
  CHECK_THROWS_AS(evaluate(unknown, c), UnknownFragment);
  const std::vector<SummaryRecord> dup{{"a", SystemLabel::mock, "x", std::nullopt},
                                       {"a", SystemLabel::mock, "y", std::nullopt}};
  CHECK_THROWS_AS(evaluate(dup, c), Error);
}

TEST_CASE("empty record set") {
  const EvaluationReport r = evaluate(std::vector<SummaryRecord>{}, corpus());
  CHECK(r.systems.empty());
  CHECK(r.breakdown.empty());
  const std::string table = emit_report(r, ReportFormat::table);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1);
  CHECK(report_from_json(nlohmann::json::parse(emit_report(r, ReportFormat::json))) == r);
}

TEST_CASE("table layout") {
  const std::string table = emit_report(evaluate(records(), corpus()), ReportFormat::table);
  const std::string header = table.substr(0, table.find('\n'));
  CHECK(header == "System                R-1    R-2    R-L    B-1    B-2    B-3    B-4  Overlap");
  const std::string first = table.substr(table.find('\n') + 1);
  CHECK(first.rfind("tfidf_baseline ", 0) == 0);
  CHECK(first.find("100.00") != std::string::npos);
  CHECK(table.find("glm_direct") > table.find("tfidf_baseline"));
  for (std::size_t at = 0, next; (next = table.find('\n', at)) != std::string::npos; at = next + 1) {
    CHECK(next - at == header.size());
  }
}

TEST_CASE("json emit, parse, emit is the identity") {
  const EvaluationReport r = evaluate(records(), corpus());
  const std::string once = emit_report(r, ReportFormat::json);
  const EvaluationReport back = report_from_json(nlohmann::json::parse(once));
  CHECK(back == r);
  CHECK(emit_report(back, ReportFormat::json) == once);
  CHECK_THROWS_AS(report_from_json(nlohmann::json{{"systems", 1}}), ParseError);
}
