#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nsg {

/// One news item. `title` is the reference summary used for scoring.
struct NewsFragment {
  std::string id;
  std::string title;
  std::string body;
  std::optional<std::string> category;

  friend bool operator==(const NewsFragment&, const NewsFragment&) = default;
};

/// Ordered, validated collection of fragments. Ids are unique and bodies are
/// nonempty after trimming; a corpus is never empty.
class Corpus {
 public:
  /// Throws ParseError (line 0) on an invalid fragment or empty input and
  /// DuplicateId on a repeated id.
  static Corpus from_fragments(std::vector<NewsFragment> fragments);

  const std::vector<NewsFragment>& fragments() const noexcept { return fragments_; }
  std::size_t size() const noexcept { return fragments_.size(); }

  const NewsFragment* find(std::string_view id) const;
  /// Position of `id` in corpus order.
  std::optional<std::size_t> index_of(std::string_view id) const;

  friend bool operator==(const Corpus& a, const Corpus& b) { return a.fragments_ == b.fragments_; }

 private:
  Corpus() = default;

  std::vector<NewsFragment> fragments_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct CorpusFormat {
  /// PENS-style records: `headline` maps to title and `content` to body.
  bool pens_mapping = false;
};

/// Reads a JSON Lines corpus. Blank lines are ignored.
/// Throws IoError, ParseError (with 1-based line) or DuplicateId.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format = {});
Corpus parse_corpus(std::string_view jsonl, CorpusFormat format = {});

/// Lowercase word tokens: split on Unicode whitespace, strip leading and
/// trailing punctuation, drop empties.
using TokenSequence = std::vector<std::string>;

TokenSequence tokenize(std::string_view text);

/// Naive sentence splitter: cut after '.', '!', '?', '。', '！', '？' when the
/// terminator is followed by whitespace or end of text. Abbreviations are not
/// special-cased ("Dr. Smith" splits).
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace nsg
