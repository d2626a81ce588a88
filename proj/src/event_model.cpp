#include "nsg/event_model.hpp"

#include <algorithm>

#include "nsg/text.hpp"

namespace nsg {

using nlohmann::json;

std::string_view to_string(PatternOrigin origin) {
  switch (origin) {
    case PatternOrigin::llm:
      return "llm";
    case PatternOrigin::mock:
      return "mock";
    case PatternOrigin::crossover:
      return "crossover";
  }
  return "llm";
}

PatternOrigin parse_origin(std::string_view name) {
  if (name == "llm") return PatternOrigin::llm;
  if (name == "mock") return PatternOrigin::mock;
  if (name == "crossover") return PatternOrigin::crossover;
  throw InvalidPattern("unknown pattern origin '" + std::string(name) + "'");
}

EventPattern EventPattern::make(std::string_view event_type, std::span<const std::string> roles,
                                PatternOrigin origin) {
  EventPattern p;
  p.origin_ = origin;
  p.event_type_ = text::normalize_label(event_type);
  if (p.event_type_.empty()) throw InvalidPattern("event type is empty");
  if (p.event_type_.find(';') != std::string::npos) {
    throw InvalidPattern("event type '" + p.event_type_ + "' contains ';'");
  }
  p.roles_.reserve(roles.size());
  for (const std::string& raw : roles) {
    std::string role = text::normalize_label(raw);
    if (role.empty()) throw InvalidPattern("empty argument role in pattern '" + p.event_type_ + "'");
    if (role.find_first_of(",;") != std::string::npos) {
      throw InvalidPattern("argument role '" + role + "' contains a delimiter");
    }
    p.roles_.push_back(std::move(role));
  }
  std::sort(p.roles_.begin(), p.roles_.end());
  p.roles_.erase(std::unique(p.roles_.begin(), p.roles_.end()), p.roles_.end());
  return p;
}

EventPattern EventPattern::make(std::string_view event_type, std::initializer_list<std::string_view> roles,
                                PatternOrigin origin) {
  std::vector<std::string> owned(roles.begin(), roles.end());
  return make(event_type, owned, origin);
}

bool EventPattern::has_role(std::string_view role) const {
  return std::binary_search(roles_.begin(), roles_.end(), role);
}

EventPattern EventPattern::with_origin(PatternOrigin origin) const {
  EventPattern p = *this;
  p.origin_ = origin;
  return p;
}

std::string serialize_pattern(const EventPattern& p) {
  std::string out = "Type: " + p.event_type() + "; Arguments:";
  for (std::size_t i = 0; i < p.roles().size(); ++i) {
    out += (i == 0 ? " " : ", ");
    out += p.roles()[i];
  }
  return out;
}

namespace {

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    if (c != prefix[i]) return false;
  }
  return true;
}

std::string_view ltrim_ascii(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

// Consumes `key` followed by optional blanks and ':'. Returns false if absent.
bool consume_key(std::string_view& s, std::string_view key) {
  if (!starts_with_ci(s, key)) return false;
  std::string_view rest = ltrim_ascii(s.substr(key.size()));
  if (rest.empty() || rest.front() != ':') return false;
  s = ltrim_ascii(rest.substr(1));
  return true;
}

std::string_view strip_list_marker(std::string_view s) {
  s = ltrim_ascii(s);
  if (s.starts_with("- ") || s.starts_with("* ")) return ltrim_ascii(s.substr(2));
  if (s.starts_with("\xE2\x80\xA2")) return ltrim_ascii(s.substr(3));  // U+2022 bullet
  std::size_t digits = 0;
  while (digits < s.size() && s[digits] >= '0' && s[digits] <= '9') ++digits;
  if (digits > 0 && digits + 1 < s.size() && (s[digits] == '.' || s[digits] == ')') &&
      (s[digits + 1] == ' ' || s[digits + 1] == '\t')) {
    return ltrim_ascii(s.substr(digits + 2));
  }
  return s;
}

}  // namespace

PatternParseResult parse_pattern_text(std::string_view raw) {
  PatternParseResult result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    const std::string owned = text::trim(raw.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (owned.empty()) continue;

    auto diag = [&](std::string message) { result.diagnostics.push_back({line_no, std::move(message)}); };

    std::string_view line = strip_list_marker(owned);
    consume_key(line, "pattern");
    if (!consume_key(line, "type")) {
      diag("expected 'Type: <type>; Arguments: <roles>'");
      continue;
    }
    const std::size_t semi = line.find(';');
    if (semi == std::string_view::npos) {
      diag("missing ';' between type and arguments");
      continue;
    }
    const std::string type = text::normalize_label(line.substr(0, semi));
    if (type.empty()) {
      diag("empty event type");
      continue;
    }
    std::string_view args = ltrim_ascii(line.substr(semi + 1));
    if (!consume_key(args, "arguments") && !consume_key(args, "meta-roles") && !consume_key(args, "roles")) {
      diag("expected 'Arguments:' after the event type");
      continue;
    }

    std::vector<std::string> roles;
    std::size_t start = 0;
    while (start <= args.size()) {
      std::size_t cut = args.find_first_of(",;", start);
      if (cut == std::string_view::npos) cut = args.size();
      std::string role = text::normalize_label(args.substr(start, cut - start));
      start = cut + 1;
      if (role.empty()) continue;
      if (std::find(roles.begin(), roles.end(), role) != roles.end()) {
        diag("duplicate role '" + role + "'");
        continue;
      }
      roles.push_back(std::move(role));
    }
    try {
      result.patterns.push_back(EventPattern::make(type, roles, PatternOrigin::llm));
    } catch (const InvalidPattern& e) {
      diag(e.what());
    }
  }
  return result;
}

std::vector<EventPattern> dedupe_patterns(std::span<const EventPattern> patterns) {
  std::vector<EventPattern> out;
  out.reserve(patterns.size());
  for (const EventPattern& p : patterns) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

PatternPool build_pool(std::string fragment_id, std::span<const EventPattern> patterns) {
  PatternPool pool;
  pool.fragment_id = std::move(fragment_id);
  pool.patterns = dedupe_patterns(patterns);
  if (pool.patterns.empty()) throw EmptyPool("no event patterns for fragment '" + pool.fragment_id + "'");
  return pool;
}

json pattern_to_json(const EventPattern& p) {
  return json{{"type", p.event_type()}, {"roles", p.roles()}, {"origin", std::string(to_string(p.origin()))}};
}

EventPattern pattern_from_json(const json& j) {
  try {
    const auto roles = j.at("roles").get<std::vector<std::string>>();
    PatternOrigin origin = PatternOrigin::llm;
    if (auto it = j.find("origin"); it != j.end()) origin = parse_origin(it->get<std::string>());
    return EventPattern::make(j.at("type").get<std::string>(), roles, origin);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed pattern: ") + e.what());
  } catch (const InvalidPattern& e) {
    throw ParseError(0, std::string("invalid pattern: ") + e.what());
  }
}

json pool_to_json(const PatternPool& pool) {
  json patterns = json::array();
  for (const EventPattern& p : pool.patterns) patterns.push_back(pattern_to_json(p));
  return json{{"fragment_id", pool.fragment_id}, {"generation", pool.generation}, {"patterns", std::move(patterns)}};
}

PatternPool pool_from_json(const json& j) {
  PatternPool pool;
  try {
    pool.fragment_id = j.at("fragment_id").get<std::string>();
    pool.generation = j.at("generation").get<std::uint64_t>();
    for (const json& p : j.at("patterns")) pool.patterns.push_back(pattern_from_json(p));
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed pattern pool: ") + e.what());
  }
  if (pool.patterns.empty()) throw EmptyPool("pattern pool for '" + pool.fragment_id + "' is empty");
  return pool;
}

}  // namespace nsg
