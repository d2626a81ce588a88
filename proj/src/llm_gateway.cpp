#include "nsg/llm_gateway.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "nsg/rng.hpp"
#include "nsg/text.hpp"

namespace nsg {

using nlohmann::json;

namespace {

constexpr std::string_view kTaskExtract = "Task: extract event patterns";
constexpr std::string_view kTaskGuided = "Task: summarize news guided by an event pattern";
constexpr std::string_view kTaskDirect = "Task: summarize news";
constexpr std::string_view kTaskDigest = "Task: digest event patterns";
constexpr std::string_view kPatternLabel = "Event pattern: ";
constexpr std::string_view kNewsOpen = "News:\n<<<\n";
constexpr std::string_view kNewsClose = "\n>>>";
constexpr std::string_view kPatternsLabel = "Patterns:\n";

std::string news_block(const NewsFragment& fragment) {
  return std::string(kNewsOpen) + text::trim(fragment.body) + std::string(kNewsClose) + "\n";
}

std::string_view first_line(std::string_view s) { return s.substr(0, s.find('\n')); }

std::string news_body(std::string_view prompt) {
  const std::size_t open = prompt.find(kNewsOpen);
  if (open == std::string_view::npos) return {};
  const std::size_t begin = open + kNewsOpen.size();
  const std::size_t close = prompt.rfind(kNewsClose);
  if (close == std::string_view::npos || close < begin) return std::string(prompt.substr(begin));
  return std::string(prompt.substr(begin, close - begin));
}

std::string first_sentence(std::string_view body) {
  const auto sentences = split_sentences(body);
  return sentences.empty() ? std::string() : sentences.front();
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string mock_extract(std::string_view body) {
  std::string out;
  for (const std::string& sentence : split_sentences(body)) {
    std::vector<std::string> content;
    for (std::string& tok : tokenize(sentence)) {
      if (text::is_stopword(tok) || tok.find_first_of(",;") != std::string::npos) continue;
      content.push_back(std::move(tok));
    }
    if (content.empty()) continue;

    std::map<std::string, int> freq;
    for (const std::string& t : content) ++freq[t];
    // std::map iterates lexicographically, so the first maximum wins ties.
    auto type = std::max_element(freq.begin(), freq.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });

    std::vector<std::string> roles;
    for (const std::string& t : content) {
      if (roles.size() == 5) break;
      if (t == type->first || std::find(roles.begin(), roles.end(), t) != roles.end()) continue;
      roles.push_back(t);
    }
    out += "Type: " + type->first + "; Arguments: " + join(roles, ", ") + "\n";
  }
  return out;
}

std::string mock_guided(std::string_view prompt) {
  const std::size_t at = prompt.find(kPatternLabel);
  std::string head;
  if (at != std::string_view::npos) {
    const auto parsed = parse_pattern_text(first_line(prompt.substr(at + kPatternLabel.size())));
    if (!parsed.patterns.empty()) {
      const EventPattern& p = parsed.patterns.front();
      head = p.roles().empty() ? p.event_type() : p.event_type() + ": " + join(p.roles(), ", ");
    }
  }
  const std::string lead = first_sentence(news_body(prompt));
  if (head.empty()) return lead;
  return head + " — " + lead;
}

std::string mock_direct(std::string_view prompt) {
  const std::string lead = first_sentence(news_body(prompt));
  std::vector<std::string> kept;
  std::size_t pos = 0;
  const std::u32string cps = text::decode_utf8(lead);
  std::u32string word;
  auto flush = [&] {
    if (word.empty()) return;
    const std::string w = text::encode_utf8(word);
    const TokenSequence toks = tokenize(w);
    const bool stop = !toks.empty() && std::all_of(toks.begin(), toks.end(), [](const std::string& t) {
      return text::is_stopword(t);
    });
    if (!stop) kept.push_back(w);
    word.clear();
  };
  for (; pos < cps.size(); ++pos) {
    if (text::is_space(cps[pos])) {
      flush();
    } else {
      word.push_back(cps[pos]);
    }
  }
  flush();
  return kept.empty() ? lead : join(kept, " ");
}

std::string mock_digest(std::string_view prompt) {
  const std::size_t at = prompt.find(kPatternsLabel);
  if (at == std::string_view::npos) return {};
  std::vector<std::string> clauses;
  for (const EventPattern& p : parse_pattern_text(prompt.substr(at + kPatternsLabel.size())).patterns) {
    clauses.push_back(p.roles().empty() ? p.event_type() : p.event_type() + ": " + join(p.roles(), ", "));
  }
  return join(clauses, "; ");
}

}  // namespace

void GenerationParams::validate() const {
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be nonnegative");
  if (timeout.count() <= 0) throw ConfigError("timeout must be positive");
  if (retries < 0 || retries > 5) throw ConfigError("retries must lie in [0, 5]");
}

std::string MockLanguageModel::complete(std::string_view prompt, const GenerationParams&) {
  if (prompt.empty()) throw LlmError("empty prompt");
  const std::string_view task = first_line(prompt);
  if (task == kTaskExtract) return mock_extract(news_body(prompt));
  if (task == kTaskGuided) return mock_guided(prompt);
  if (task == kTaskDirect) return mock_direct(prompt);
  if (task == kTaskDigest) return mock_digest(prompt);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(splitmix64(seed_) ^ fnv1a64(prompt)));
  return std::string("mock completion ") + buf;
}

const std::vector<ContextExemplar>& default_exemplars() {
  static const std::vector<ContextExemplar> exemplars = {
      {"A suicide bomber detonated an explosive vest outside a police station in the capital, killing six "
       "officers and wounding several passers-by.",
       EventPattern::make("bombing", {"perpetrator", "victim", "target", "tool"})},
      {"Heavy rain caused the river to burst its banks on Monday, flooding three villages and forcing hundreds "
       "of residents to leave their homes.",
       EventPattern::make("flood", {"cause", "place", "time", "affected population"})},
      {"Shares of the carmaker fell sharply after the company reported a quarterly loss and cut its annual "
       "sales forecast.",
       EventPattern::make("earnings report", {"company", "financial result", "market reaction", "period"})},
  };
  return exemplars;
}

std::vector<ContextExemplar> load_exemplars(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open exemplar file '" + path + "'");
  std::vector<ContextExemplar> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string event_text = j.at("text").get<std::string>();
      const auto parsed = parse_pattern_text(j.at("pattern").get<std::string>());
      if (text::trim(event_text).empty() || parsed.patterns.size() != 1 || !parsed.diagnostics.empty()) {
        throw ParseError(line_no, "exemplar needs a nonempty text and exactly one valid pattern");
      }
      out.push_back({event_text, parsed.patterns.front()});
    } catch (const json::exception& e) {
      throw ParseError(line_no, std::string("malformed exemplar: ") + e.what());
    }
  }
  return out;
}

std::string build_extraction_prompt(const NewsFragment& fragment, std::span<const ContextExemplar> exemplars,
                                    std::size_t per_fragment_target) {
  std::string p(kTaskExtract);
  p += "\nFirst choose one overall event type that generalizes the news below. Then identify the distinct "
       "events the text describes and write one event pattern for each event.\n"
       "Write every pattern on its own line as:\n"
       "Type: <event type>; Arguments: <role>, <role>, ...\n"
       "Arguments are abstract argument roles such as perpetrator, victim, place or time, not spans copied "
       "from the text.\n";
  if (!exemplars.empty()) {
    p += "\nExamples:\n";
    for (const ContextExemplar& ex : exemplars) {
      p += "\nText: " + text::trim(ex.event_text) + "\nPattern: " + serialize_pattern(ex.pattern) + "\n";
    }
  }
  p += "\nReturn at most " + std::to_string(per_fragment_target) + " patterns and nothing else.\n\n";
  p += news_block(fragment);
  return p;
}

std::string build_guided_summary_prompt(const NewsFragment& fragment, const EventPattern& pattern) {
  std::string p(kTaskGuided);
  p += "\nWrite a one-sentence headline-style summary of the news below. Cover the event type and the "
       "argument roles of this event pattern.\n";
  p += std::string(kPatternLabel) + serialize_pattern(pattern) + "\n\n";
  p += news_block(fragment);
  return p;
}

std::string build_direct_summary_prompt(const NewsFragment& fragment) {
  std::string p(kTaskDirect);
  p += "\nWrite a one-sentence headline-style summary of the news below.\n\n";
  p += news_block(fragment);
  return p;
}

std::string build_digest_prompt(std::span<const EventPattern> patterns) {
  std::string p(kTaskDigest);
  p += "\nWrite a short digest of the events described by these high-quality event patterns, one clause per "
       "pattern.\n";
  p += kPatternsLabel;
  for (const EventPattern& e : patterns) p += serialize_pattern(e) + "\n";
  return p;
}

ExtractionResult extract_patterns(LanguageModel& model, const NewsFragment& fragment,
                                  std::span<const ContextExemplar> exemplars, std::size_t per_fragment_target,
                                  const GenerationParams& params) {
  if (per_fragment_target == 0) throw ConfigError("per_fragment_target must be positive");
  if (exemplars.empty() && model.pattern_origin() != PatternOrigin::mock) {
    throw ConfigError("pattern extraction needs at least one context exemplar");
  }
  const std::string prompt = build_extraction_prompt(fragment, exemplars, per_fragment_target);
  ExtractionResult result;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    result.attempts = attempt;
    PatternParseResult parsed = parse_pattern_text(model.complete(prompt, params));
    result.diagnostics.insert(result.diagnostics.end(), parsed.diagnostics.begin(), parsed.diagnostics.end());
    if (parsed.patterns.empty()) continue;
    for (EventPattern& p : parsed.patterns) {
      if (result.patterns.size() == per_fragment_target) break;
      result.patterns.push_back(p.with_origin(model.pattern_origin()));
    }
    return result;
  }
  throw NoValidPatterns("no valid event pattern extracted for fragment '" + fragment.id + "'");
}

std::string_view to_string(SystemLabel system) {
  switch (system) {
    case SystemLabel::nsg:
      return "nsg";
    case SystemLabel::glm_direct:
      return "glm_direct";
    case SystemLabel::tfidf_baseline:
      return "tfidf_baseline";
    case SystemLabel::textrank_baseline:
      return "textrank_baseline";
    case SystemLabel::mock:
      return "mock";
  }
  return "mock";
}

SystemLabel parse_system(std::string_view name) {
  for (SystemLabel s : {SystemLabel::nsg, SystemLabel::glm_direct, SystemLabel::tfidf_baseline,
                        SystemLabel::textrank_baseline, SystemLabel::mock}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unknown system '" + std::string(name) + "'");
}

void SummaryRecord::validate() const {
  if (fragment_id.empty()) throw LlmError("summary record without fragment id");
  if (text::trim(summary).empty()) throw LlmError("empty summary for fragment '" + fragment_id + "'");
  if (guiding_pattern.has_value() != (system == SystemLabel::nsg)) {
    throw LlmError("guiding pattern must be present exactly for nsg summaries ('" + fragment_id + "')");
  }
}

SummaryRecord generate_summary(LanguageModel& model, const NewsFragment& fragment, const EventPattern& pattern,
                               const GenerationParams& params) {
  SummaryRecord r{fragment.id, SystemLabel::nsg,
                  text::trim(model.complete(build_guided_summary_prompt(fragment, pattern), params)), pattern};
  r.validate();
  return r;
}

SummaryRecord generate_summary_direct(LanguageModel& model, const NewsFragment& fragment,
                                      const GenerationParams& params) {
  SummaryRecord r{fragment.id, SystemLabel::glm_direct,
                  text::trim(model.complete(build_direct_summary_prompt(fragment), params)), std::nullopt};
  r.validate();
  return r;
}

json summary_to_json(const SummaryRecord& r) {
  json j{{"fragment_id", r.fragment_id}, {"system", std::string(to_string(r.system))}, {"summary", r.summary}};
  if (r.guiding_pattern) j["guiding_pattern"] = pattern_to_json(*r.guiding_pattern);
  return j;
}

SummaryRecord summary_from_json(const json& j) {
  SummaryRecord r;
  try {
    r.fragment_id = j.at("fragment_id").get<std::string>();
    r.system = parse_system(j.at("system").get<std::string>());
    r.summary = j.at("summary").get<std::string>();
    if (auto it = j.find("guiding_pattern"); it != j.end()) r.guiding_pattern = pattern_from_json(*it);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed summary record: ") + e.what());
  }
  r.validate();
  return r;
}

}  // namespace nsg
