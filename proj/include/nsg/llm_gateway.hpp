#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsg/corpus.hpp"
#include "nsg/error.hpp"
#include "nsg/event_model.hpp"

namespace nsg {

class LlmError : public Error {
 public:
  using Error::Error;
};

/// Non-retryable HTTP status or an unreadable success body.
class RemoteError : public LlmError {
 public:
  RemoteError(int status, std::string body_excerpt)
      : LlmError("remote model returned status " + std::to_string(status) + ": " + body_excerpt),
        status_(status),
        excerpt_(std::move(body_excerpt)) {}

  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return excerpt_; }

 private:
  int status_;
  std::string excerpt_;
};

/// Every allowed attempt failed transiently.
class ExhaustedRetries : public LlmError {
 public:
  ExhaustedRetries(std::size_t attempts, std::string last_failure)
      : LlmError("remote model failed after " + std::to_string(attempts) + " attempt(s): " + last_failure),
        attempts_(attempts) {}

  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

/// Every attempt timed out.
class TimeoutError : public ExhaustedRetries {
 public:
  explicit TimeoutError(std::size_t attempts) : ExhaustedRetries(attempts, "timed out") {}
};

class NoValidPatterns : public LlmError {
 public:
  using LlmError::LlmError;
};

struct GenerationParams {
  int max_tokens = 256;
  double temperature = 0.0;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;

  /// Throws ConfigError unless max_tokens > 0, temperature >= 0,
  /// timeout > 0 and 0 <= retries <= 5.
  void validate() const;
};

/// Single completion boundary in front of a language model.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  /// Throws LlmError subclasses. Implementations are safe to call from
  /// several threads at once.
  virtual std::string complete(std::string_view prompt, const GenerationParams& params) = 0;

  /// Origin tag stamped on patterns this model extracts.
  virtual PatternOrigin pattern_origin() const = 0;
};

/// Deterministic stand-in. Output is a pure function of (prompt, seed) and
/// recognizes the prompts assembled below:
///  - extraction: one pattern per sentence; the type is the most frequent
///    non-stopword token (ties lexicographic), the roles up to five further
///    distinct non-stopword tokens in sentence order;
///  - guided summary: "<type>: <roles joined by ', '> — <first sentence>";
///  - direct summary: the first sentence with stopwords dropped;
///  - digest: "<type>: <roles>" per pattern joined by "; ".
class MockLanguageModel final : public LanguageModel {
 public:
  explicit MockLanguageModel(std::uint64_t seed = 0) : seed_(seed) {}

  std::string complete(std::string_view prompt, const GenerationParams& params) override;
  PatternOrigin pattern_origin() const override { return PatternOrigin::mock; }

 private:
  std::uint64_t seed_;
};

/// Text-pattern pair shown to the model as an in-context demonstration.
struct ContextExemplar {
  std::string event_text;
  EventPattern pattern;
};

/// Three built-in demonstrations, the first being the classic bombing schema.
const std::vector<ContextExemplar>& default_exemplars();

/// JSON Lines of {"text": ..., "pattern": "Type: ...; Arguments: ..."}.
std::vector<ContextExemplar> load_exemplars(const std::string& path);

std::string build_extraction_prompt(const NewsFragment& fragment, std::span<const ContextExemplar> exemplars,
                                    std::size_t per_fragment_target);
std::string build_guided_summary_prompt(const NewsFragment& fragment, const EventPattern& pattern);
std::string build_direct_summary_prompt(const NewsFragment& fragment);
std::string build_digest_prompt(std::span<const EventPattern> patterns);

struct ExtractionResult {
  std::vector<EventPattern> patterns;
  std::vector<ParseDiagnostic> diagnostics;
  int attempts = 0;
};

/// Prompts for patterns, parses the reply and keeps up to
/// `per_fragment_target` of them. A reply with no valid pattern is retried
/// once before NoValidPatterns is thrown. `exemplars` may be empty only for
/// the mock model.
ExtractionResult extract_patterns(LanguageModel& model, const NewsFragment& fragment,
                                  std::span<const ContextExemplar> exemplars, std::size_t per_fragment_target,
                                  const GenerationParams& params);

enum class SystemLabel { nsg, glm_direct, tfidf_baseline, textrank_baseline, mock };

std::string_view to_string(SystemLabel system);
/// Throws ConfigError on an unknown label.
SystemLabel parse_system(std::string_view name);

struct SummaryRecord {
  std::string fragment_id;
  SystemLabel system = SystemLabel::mock;
  std::string summary;
  std::optional<EventPattern> guiding_pattern;  // present iff system == nsg

  /// Throws LlmError when an invariant is broken.
  void validate() const;
};

SummaryRecord generate_summary(LanguageModel& model, const NewsFragment& fragment, const EventPattern& pattern,
                               const GenerationParams& params);
SummaryRecord generate_summary_direct(LanguageModel& model, const NewsFragment& fragment,
                                      const GenerationParams& params);

nlohmann::json summary_to_json(const SummaryRecord& r);
SummaryRecord summary_from_json(const nlohmann::json& j);

}  // namespace nsg
