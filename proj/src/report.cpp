#include "nsg/report.hpp"

#include <algorithm>
#include <tuple>

#include <spdlog/fmt/fmt.h>

namespace nsg {

using nlohmann::json;

SummaryScores score_summary(const std::string& summary, const NewsFragment& fragment,
                            const EvaluateOptions& options) {
  const TokenSequence cand = tokenize(summary);
  const TokenSequence ref = tokenize(fragment.title);
  SummaryScores s;
  s.rouge1 = rouge_n(cand, ref, 1);
  s.rouge2 = rouge_n(cand, ref, 2);
  s.rougeL = rouge_l(cand, ref);
  const auto b = bleu(cand, ref, BleuOptions{4, options.bleu_smoothing});
  std::copy(b.begin(), b.end(), s.bleu.begin());
  s.overlap_pct =
      overlap_pct(cand, options.overlap_against == OverlapComparand::source ? tokenize(fragment.body) : ref);
  return s;
}

namespace {

void accumulate(PRF& into, const PRF& x) {
  into.precision += x.precision;
  into.recall += x.recall;
  into.f1 += x.f1;
}

void scale(PRF& p, double k) {
  p.precision *= k;
  p.recall *= k;
  p.f1 *= k;
}

}  // namespace

EvaluationReport evaluate(std::span<const SummaryRecord> records, const Corpus& corpus,
                          const EvaluateOptions& options) {
  struct Keyed {
    std::size_t position;
    std::string system;
    const SummaryRecord* record;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(records.size());
  for (const SummaryRecord& r : records) {
    const auto pos = corpus.index_of(r.fragment_id);
    if (!pos) throw UnknownFragment(r.fragment_id);
    keyed.push_back({*pos, std::string(to_string(r.system)), &r});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.position, a.system) < std::tie(b.position, b.system);
  });
  for (std::size_t i = 1; i < keyed.size(); ++i) {
    if (keyed[i].position == keyed[i - 1].position && keyed[i].system == keyed[i - 1].system) {
      throw Error("duplicate " + keyed[i].system + " summary for fragment '" + keyed[i].record->fragment_id + "'");
    }
  }

  EvaluationReport report;
  for (const Keyed& k : keyed) {
    const SummaryScores s = score_summary(k.record->summary, corpus.fragments()[k.position], options);
    report.breakdown.push_back({k.record->fragment_id, k.system, s});
    SystemScore& agg = report.systems[k.system];
    accumulate(agg.mean.rouge1, s.rouge1);
    accumulate(agg.mean.rouge2, s.rouge2);
    accumulate(agg.mean.rougeL, s.rougeL);
    for (std::size_t i = 0; i < 4; ++i) agg.mean.bleu[i] += s.bleu[i];
    agg.mean.overlap_pct += s.overlap_pct;
    ++agg.fragments;
  }
  for (auto& [name, agg] : report.systems) {
    const double k = 1.0 / static_cast<double>(agg.fragments);
    scale(agg.mean.rouge1, k);
    scale(agg.mean.rouge2, k);
    scale(agg.mean.rougeL, k);
    for (double& b : agg.mean.bleu) b *= k;
    agg.mean.overlap_pct *= k;
  }
  return report;
}

namespace {

json prf_to_json(const PRF& p) { return json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}}; }

PRF prf_from_json(const json& j) {
  return PRF{j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

json scores_to_json(const SummaryScores& s) {
  return json{{"rouge1", prf_to_json(s.rouge1)},
              {"rouge2", prf_to_json(s.rouge2)},
              {"rougeL", prf_to_json(s.rougeL)},
              {"bleu", s.bleu},
              {"overlap_pct", s.overlap_pct}};
}

SummaryScores scores_from_json(const json& j) {
  SummaryScores s;
  s.rouge1 = prf_from_json(j.at("rouge1"));
  s.rouge2 = prf_from_json(j.at("rouge2"));
  s.rougeL = prf_from_json(j.at("rougeL"));
  s.bleu = j.at("bleu").get<std::array<double, 4>>();
  s.overlap_pct = j.at("overlap_pct").get<double>();
  return s;
}

// Known systems first in table order, anything else alphabetically after.
std::vector<std::string> table_order(const EvaluationReport& report) {
  static const std::vector<std::string> kKnown = {"tfidf_baseline", "textrank_baseline", "glm_direct", "nsg", "mock"};
  std::vector<std::string> rows;
  for (const std::string& name : kKnown) {
    if (report.systems.count(name)) rows.push_back(name);
  }
  for (const auto& [name, _] : report.systems) {
    if (std::find(kKnown.begin(), kKnown.end(), name) == kKnown.end()) rows.push_back(name);
  }
  return rows;
}

std::string emit_table(const EvaluationReport& report) {
  std::string out = fmt::format("{:<18}{:>7}{:>7}{:>7}{:>7}{:>7}{:>7}{:>7}{:>9}\n", "System", "R-1", "R-2", "R-L",
                                "B-1", "B-2", "B-3", "B-4", "Overlap");
  for (const std::string& name : table_order(report)) {
    const SummaryScores& m = report.systems.at(name).mean;
    out += fmt::format("{:<18}{:>7.3f}{:>7.3f}{:>7.3f}{:>7.3f}{:>7.3f}{:>7.3f}{:>7.3f}{:>9.2f}\n", name, m.rouge1.f1,
                       m.rouge2.f1, m.rougeL.f1, m.bleu[0], m.bleu[1], m.bleu[2], m.bleu[3], m.overlap_pct);
  }
  return out;
}

}  // namespace

json report_to_json(const EvaluationReport& report) {
  json systems = json::object();
  for (const auto& [name, agg] : report.systems) {
    json row = scores_to_json(agg.mean);
    row["fragments"] = agg.fragments;
    systems[name] = std::move(row);
  }
  json breakdown = json::array();
  for (const FragmentScore& f : report.breakdown) {
    json row = scores_to_json(f.scores);
    row["fragment_id"] = f.fragment_id;
    row["system"] = f.system;
    breakdown.push_back(std::move(row));
  }
  return json{{"systems", std::move(systems)}, {"breakdown", std::move(breakdown)}};
}

EvaluationReport report_from_json(const json& j) {
  EvaluationReport report;
  try {
    for (const auto& [name, row] : j.at("systems").items()) {
      report.systems[name] = SystemScore{scores_from_json(row), row.at("fragments").get<std::size_t>()};
    }
    for (const json& row : j.at("breakdown")) {
      report.breakdown.push_back(
          {row.at("fragment_id").get<std::string>(), row.at("system").get<std::string>(), scores_from_json(row)});
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed evaluation report: ") + e.what());
  }
  return report;
}

std::string emit_report(const EvaluationReport& report, ReportFormat format) {
  if (format == ReportFormat::table) return emit_table(report);
  return report_to_json(report).dump(2) + "\n";
}

}  // namespace nsg
