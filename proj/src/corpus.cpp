#include "nsg/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsg/error.hpp"
#include "nsg/text.hpp"

namespace nsg {

using nlohmann::json;

namespace {

std::string required_string(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) throw ParseError(line, std::string("missing field \"") + key + "\"");
  if (!it->is_string()) throw ParseError(line, std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

NewsFragment parse_record(std::string_view line_text, std::size_t line, const CorpusFormat& format) {
  json record;
  try {
    record = json::parse(line_text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
  if (!record.is_object()) throw ParseError(line, "record must be a JSON object");

  NewsFragment f;
  auto id = record.find("id");
  if (id == record.end()) throw ParseError(line, "missing field \"id\"");
  if (id->is_string()) {
    f.id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    f.id = std::to_string(id->get<long long>());
  } else {
    throw ParseError(line, "field \"id\" must be a string or integer");
  }
  f.title = required_string(record, format.pens_mapping ? "headline" : "title", line);
  f.body = required_string(record, format.pens_mapping ? "content" : "body", line);
  if (auto cat = record.find("category"); cat != record.end() && !cat->is_null()) {
    if (!cat->is_string()) throw ParseError(line, "field \"category\" must be a string");
    f.category = cat->get<std::string>();
  }
  if (f.id.empty()) throw ParseError(line, "empty id");
  if (text::trim(f.body).empty()) throw ParseError(line, "empty body");
  return f;
}

}  // namespace

Corpus Corpus::from_fragments(std::vector<NewsFragment> fragments) {
  if (fragments.empty()) throw ParseError(0, "corpus contains no fragments");
  Corpus c;
  c.index_.reserve(fragments.size());
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    const NewsFragment& f = fragments[i];
    if (f.id.empty()) throw ParseError(0, "fragment " + std::to_string(i) + " has an empty id");
    if (text::trim(f.body).empty()) throw ParseError(0, "fragment '" + f.id + "' has an empty body");
    if (!c.index_.emplace(f.id, i).second) throw DuplicateId(f.id);
  }
  c.fragments_ = std::move(fragments);
  return c;
}

const NewsFragment* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &fragments_[it->second];
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Corpus parse_corpus(std::string_view jsonl, CorpusFormat format) {
  std::vector<NewsFragment> fragments;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl.size()) {
    std::size_t eol = jsonl.find('\n', pos);
    if (eol == std::string_view::npos) eol = jsonl.size();
    std::string_view line = jsonl.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (text::trim(line).empty()) continue;
    NewsFragment f = parse_record(line, line_no, format);
    if (!seen.emplace(f.id, line_no).second) throw DuplicateId(f.id);
    fragments.push_back(std::move(f));
  }
  if (fragments.empty()) throw ParseError(0, "corpus contains no fragments");
  return Corpus::from_fragments(std::move(fragments));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading corpus file '" + path.string() + "'");
  return parse_corpus(buf.str(), format);
}

TokenSequence tokenize(std::string_view text_bytes) {
  TokenSequence tokens;
  const std::u32string cps = text::decode_utf8(text_bytes);
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    while (i < n && text::is_space(cps[i])) ++i;
    std::size_t b = i;
    while (i < n && !text::is_space(cps[i])) ++i;
    std::size_t e = i;
    while (b < e && text::is_punct(cps[b])) ++b;
    while (e > b && text::is_punct(cps[e - 1])) --e;
    if (b == e) continue;
    std::u32string word(cps.begin() + static_cast<std::ptrdiff_t>(b), cps.begin() + static_cast<std::ptrdiff_t>(e));
    for (char32_t& c : word) c = text::to_lower(c);
    tokens.push_back(text::encode_utf8(word));
  }
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text_bytes) {
  std::vector<std::string> sentences;
  const std::u32string cps = text::decode_utf8(text_bytes);
  const std::u32string_view view(cps);
  auto flush = [&](std::size_t b, std::size_t e) {
    std::string s = text::trim(text::encode_utf8(view.substr(b, e - b)));
    if (!s.empty()) sentences.push_back(std::move(s));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (!text::is_sentence_terminator(cps[i])) continue;
    if (i + 1 == cps.size() || text::is_space(cps[i + 1])) {
      flush(start, i + 1);
      start = i + 1;
    }
  }
  flush(start, cps.size());
  return sentences;
}

}  // namespace nsg
