#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsg/error.hpp"

namespace nsg {

enum class PatternOrigin { llm, mock, crossover };

std::string_view to_string(PatternOrigin origin);
PatternOrigin parse_origin(std::string_view name);

class InvalidPattern : public Error {
 public:
  using Error::Error;
};

class EmptyPool : public Error {
 public:
  using Error::Error;
};

/// An event type plus a set of argument roles: the chromosome under evolution.
///
/// Type and roles are normalized (lowercase, trimmed, inner whitespace
/// collapsed). Roles are kept as a sorted set. A type may not contain ';' or
/// a line break; a role may additionally not contain ','. Equality compares
/// type and roles only, never origin.
class EventPattern {
 public:
  /// Normalizes and validates. Duplicate roles collapse silently.
  /// Throws InvalidPattern on an empty type, an empty role or a delimiter
  /// character.
  static EventPattern make(std::string_view event_type, std::span<const std::string> roles,
                           PatternOrigin origin = PatternOrigin::llm);
  static EventPattern make(std::string_view event_type, std::initializer_list<std::string_view> roles,
                           PatternOrigin origin = PatternOrigin::llm);

  const std::string& event_type() const noexcept { return event_type_; }
  const std::vector<std::string>& roles() const noexcept { return roles_; }
  PatternOrigin origin() const noexcept { return origin_; }

  bool has_role(std::string_view role) const;
  EventPattern with_origin(PatternOrigin origin) const;

  friend bool operator==(const EventPattern& a, const EventPattern& b) {
    return a.event_type_ == b.event_type_ && a.roles_ == b.roles_;
  }

 private:
  EventPattern() = default;

  std::string event_type_;
  std::vector<std::string> roles_;
  PatternOrigin origin_ = PatternOrigin::llm;
};

/// Canonical single-line form: "Type: <t>; Arguments: <r1>, <r2>".
std::string serialize_pattern(const EventPattern& p);

struct ParseDiagnostic {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct PatternParseResult {
  std::vector<EventPattern> patterns;
  std::vector<ParseDiagnostic> diagnostics;
};

/// Parses "Type: <t>; Arguments: <a1>, <a2>, ..." lines. Keys are
/// case-insensitive, "meta-roles"/"roles" are accepted for "Arguments", and a
/// leading bullet, list number or "Pattern:" label is skipped. Blank lines are
/// ignored; every other unparseable line yields a diagnostic. Never throws.
PatternParseResult parse_pattern_text(std::string_view raw);

/// Candidate pattern population for one fragment.
struct PatternPool {
  std::string fragment_id;
  std::vector<EventPattern> patterns;
  std::uint64_t generation = 0;
};

/// Pool at generation 0 with exact duplicates (type and role set) collapsed,
/// first occurrence kept. Throws EmptyPool when no pattern is given.
PatternPool build_pool(std::string fragment_id, std::span<const EventPattern> patterns);

/// Order-preserving removal of patterns equal to an earlier one.
std::vector<EventPattern> dedupe_patterns(std::span<const EventPattern> patterns);

nlohmann::json pattern_to_json(const EventPattern& p);
/// Throws ParseError (line 0) on a malformed object.
EventPattern pattern_from_json(const nlohmann::json& j);

/// {fragment_id, generation, patterns:[{type, roles, origin}]}
nlohmann::json pool_to_json(const PatternPool& pool);
PatternPool pool_from_json(const nlohmann::json& j);

}  // namespace nsg
