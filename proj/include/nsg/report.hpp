#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsg/corpus.hpp"
#include "nsg/error.hpp"
#include "nsg/llm_gateway.hpp"
#include "nsg/metrics.hpp"

namespace nsg {

class UnknownFragment : public Error {
 public:
  explicit UnknownFragment(const std::string& id) : Error("summary refers to unknown fragment '" + id + "'") {}
};

enum class OverlapComparand { source, reference };

struct EvaluateOptions {
  OverlapComparand overlap_against = OverlapComparand::source;
  bool bleu_smoothing = false;
};

struct SummaryScores {
  PRF rouge1;
  PRF rouge2;
  PRF rougeL;
  std::array<double, 4> bleu{};
  double overlap_pct = 0.0;

  friend bool operator==(const SummaryScores&, const SummaryScores&) = default;
};

struct FragmentScore {
  std::string fragment_id;
  std::string system;
  SummaryScores scores;

  friend bool operator==(const FragmentScore&, const FragmentScore&) = default;
};

struct SystemScore {
  SummaryScores mean;
  std::size_t fragments = 0;

  friend bool operator==(const SystemScore&, const SystemScore&) = default;
};

struct EvaluationReport {
  std::map<std::string, SystemScore> systems;
  /// One entry per evaluated record, ordered by corpus position then system.
  std::vector<FragmentScore> breakdown;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Scores one summary: reference = title, source = body.
SummaryScores score_summary(const std::string& summary, const NewsFragment& fragment,
                            const EvaluateOptions& options = {});

/// Corpus-level means per system. Throws UnknownFragment for an id missing
/// from the corpus and Error for a repeated (fragment, system) pair. The
/// result does not depend on record order.
EvaluationReport evaluate(std::span<const SummaryRecord> records, const Corpus& corpus,
                          const EvaluateOptions& options = {});

enum class ReportFormat { json, table };

nlohmann::json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

/// JSON is key-sorted with two-space indent; the table has the columns
/// System R-1 R-2 R-L B-1 B-2 B-3 B-4 Overlap (ROUGE as F1).
std::string emit_report(const EvaluationReport& report, ReportFormat format);

}  // namespace nsg
