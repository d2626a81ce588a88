#include "nsg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <spdlog/fmt/fmt.h>

#include "nsg/text.hpp"

namespace nsg {

namespace fs = std::filesystem;

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("invalid value '" + value + "' for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = text::to_lower(value);
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError("invalid boolean '" + value + "' for " + key);
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return (p.is_absolute() || base.empty() ? p : base / p).lexically_normal();
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::string join_systems(const std::vector<SystemLabel>& systems) {
  std::string out;
  for (SystemLabel s : systems) {
    if (!out.empty()) out += ',';
    out += to_string(s);
  }
  return out;
}

struct Key {
  std::string_view name;
  std::function<void(PipelineConfig&, const std::string&, const fs::path&)> set;
  std::function<std::string(const PipelineConfig&)> get;  // empty: not serialized
};

const std::vector<Key>& keys() {
  using C = PipelineConfig;
  using P = fs::path;
  using S = std::string;
  static const std::vector<Key> table = {
      {"corpus.path", [](C& c, const S& v, const P& b) { c.corpus_path = resolve(b, v); },
       [](const C& c) { return c.corpus_path.string(); }},
      {"corpus.pens_mapping", [](C& c, const S& v, const P&) { c.pens_mapping = parse_bool("corpus.pens_mapping", v); },
       [](const C& c) { return fmt_bool(c.pens_mapping); }},
      {"output.dir", [](C& c, const S& v, const P& b) { c.output_dir = resolve(b, v); }, {}},
      {"systems", [](C& c, const S& v, const P&) { c.systems = parse_system_list(v); },
       [](const C& c) { return join_systems(c.systems); }},
      {"llm.mock", [](C& c, const S& v, const P&) { c.llm.mock = parse_bool("llm.mock", v); },
       [](const C& c) { return fmt_bool(c.llm.mock); }},
      {"llm.endpoint", [](C& c, const S& v, const P&) { c.llm.endpoint = v; }, [](const C& c) { return c.llm.endpoint; }},
      {"llm.model", [](C& c, const S& v, const P&) { c.llm.model = v; }, [](const C& c) { return c.llm.model; }},
      {"llm.api_key_env", [](C& c, const S& v, const P&) { c.llm.api_key_env = v; },
       [](const C& c) { return c.llm.api_key_env; }},
      {"llm.seed", [](C& c, const S& v, const P&) { c.llm.seed = parse_number<std::uint64_t>("llm.seed", v); },
       [](const C& c) { return std::to_string(c.llm.seed); }},
      {"llm.timeout_ms",
       [](C& c, const S& v, const P&) {
         c.llm.params.timeout = std::chrono::milliseconds(parse_number<long>("llm.timeout_ms", v));
       },
       [](const C& c) { return std::to_string(c.llm.params.timeout.count()); }},
      {"llm.retries", [](C& c, const S& v, const P&) { c.llm.params.retries = parse_number<int>("llm.retries", v); },
       [](const C& c) { return std::to_string(c.llm.params.retries); }},
      {"llm.max_tokens",
       [](C& c, const S& v, const P&) { c.llm.params.max_tokens = parse_number<int>("llm.max_tokens", v); },
       [](const C& c) { return std::to_string(c.llm.params.max_tokens); }},
      {"llm.temperature",
       [](C& c, const S& v, const P&) { c.llm.params.temperature = parse_number<double>("llm.temperature", v); },
       [](const C& c) { return fmt::format("{}", c.llm.params.temperature); }},
      {"llm.max_concurrency",
       [](C& c, const S& v, const P&) { c.llm.max_concurrency = parse_number<std::size_t>("llm.max_concurrency", v); },
       [](const C& c) { return std::to_string(c.llm.max_concurrency); }},
      {"llm.backoff_ms",
       [](C& c, const S& v, const P&) {
         c.llm.backoff = std::chrono::milliseconds(parse_number<long>("llm.backoff_ms", v));
       },
       [](const C& c) { return std::to_string(c.llm.backoff.count()); }},
      {"extract.per_fragment_target",
       [](C& c, const S& v, const P&) {
         c.per_fragment_target = parse_number<std::size_t>("extract.per_fragment_target", v);
       },
       [](const C& c) { return std::to_string(c.per_fragment_target); }},
      {"extract.exemplars",
       [](C& c, const S& v, const P& b) {
         if (v.empty()) {
           c.exemplars.reset();
         } else {
           c.exemplars = resolve(b, v);
         }
       },
       [](const C& c) { return c.exemplars ? c.exemplars->string() : std::string(); }},
      {"evolution.max_generations",
       [](C& c, const S& v, const P&) {
         c.evolution.max_generations = parse_number<int>("evolution.max_generations", v);
       },
       [](const C& c) { return std::to_string(c.evolution.max_generations); }},
      {"evolution.parent_fraction",
       [](C& c, const S& v, const P&) {
         c.evolution.parent_fraction = parse_number<double>("evolution.parent_fraction", v);
       },
       [](const C& c) { return fmt::format("{}", c.evolution.parent_fraction); }},
      {"evolution.population_cap",
       [](C& c, const S& v, const P&) {
         c.evolution.population_cap = parse_number<std::size_t>("evolution.population_cap", v);
       },
       [](const C& c) { return std::to_string(c.evolution.population_cap); }},
      {"evolution.seed",
       [](C& c, const S& v, const P&) { c.evolution.seed = parse_number<std::uint64_t>("evolution.seed", v); },
       [](const C& c) { return std::to_string(c.evolution.seed); }},
      {"fitness.alpha",
       [](C& c, const S& v, const P&) { c.evolution.fitness.alpha = parse_number<double>("fitness.alpha", v); },
       [](const C& c) { return fmt::format("{}", c.evolution.fitness.alpha); }},
      {"fitness.beta",
       [](C& c, const S& v, const P&) { c.evolution.fitness.beta = parse_number<double>("fitness.beta", v); },
       [](const C& c) { return fmt::format("{}", c.evolution.fitness.beta); }},
      {"fitness.damping",
       [](C& c, const S& v, const P&) {
         c.evolution.fitness.textrank.damping = parse_number<double>("fitness.damping", v);
       },
       [](const C& c) { return fmt::format("{}", c.evolution.fitness.textrank.damping); }},
      {"fitness.tolerance",
       [](C& c, const S& v, const P&) {
         c.evolution.fitness.textrank.tolerance = parse_number<double>("fitness.tolerance", v);
       },
       [](const C& c) { return fmt::format("{}", c.evolution.fitness.textrank.tolerance); }},
      {"fitness.max_iterations",
       [](C& c, const S& v, const P&) {
         c.evolution.fitness.textrank.max_iterations = parse_number<int>("fitness.max_iterations", v);
       },
       [](const C& c) { return std::to_string(c.evolution.fitness.textrank.max_iterations); }},
      {"baseline.max_sentences",
       [](C& c, const S& v, const P&) {
         c.baseline_max_sentences = parse_number<std::size_t>("baseline.max_sentences", v);
       },
       [](const C& c) { return std::to_string(c.baseline_max_sentences); }},
      {"metrics.overlap_against",
       [](C& c, const S& v, const P&) {
         if (v == "source") {
           c.metrics.overlap_against = OverlapComparand::source;
         } else if (v == "reference") {
           c.metrics.overlap_against = OverlapComparand::reference;
         } else {
           throw ConfigError("metrics.overlap_against must be 'source' or 'reference'");
         }
       },
       [](const C& c) {
         return std::string(c.metrics.overlap_against == OverlapComparand::source ? "source" : "reference");
       }},
      {"metrics.bleu_smoothing",
       [](C& c, const S& v, const P&) { c.metrics.bleu_smoothing = parse_bool("metrics.bleu_smoothing", v); },
       [](const C& c) { return fmt_bool(c.metrics.bleu_smoothing); }},
      {"pipeline.workers",
       [](C& c, const S& v, const P&) { c.workers = parse_number<std::size_t>("pipeline.workers", v); },
       [](const C& c) { return std::to_string(c.workers); }},
      {"pipeline.checkpoint_every",
       [](C& c, const S& v, const P&) { c.checkpoint_every = parse_number<int>("pipeline.checkpoint_every", v); },
       [](const C& c) { return std::to_string(c.checkpoint_every); }},
      {"pipeline.digest", [](C& c, const S& v, const P&) { c.digest = parse_bool("pipeline.digest", v); },
       [](const C& c) { return fmt_bool(c.digest); }},
  };
  return table;
}

}  // namespace

bool PipelineConfig::runs(SystemLabel s) const { return std::find(systems.begin(), systems.end(), s) != systems.end(); }

void PipelineConfig::validate() const {
  if (corpus_path.empty()) throw ConfigError("corpus.path is required");
  if (systems.empty()) throw ConfigError("at least one system must be selected");
  for (SystemLabel s : systems) {
    if (s == SystemLabel::mock) throw ConfigError("'mock' is a record label, not a runnable system");
  }
  if (output_dir.empty()) throw ConfigError("output.dir is required");
  if (per_fragment_target == 0) throw ConfigError("extract.per_fragment_target must be positive");
  if (baseline_max_sentences == 0) throw ConfigError("baseline.max_sentences must be positive");
  if (workers == 0) throw ConfigError("pipeline.workers must be positive");
  if (checkpoint_every < 0) throw ConfigError("pipeline.checkpoint_every must be nonnegative");
  if (llm.max_concurrency == 0) throw ConfigError("llm.max_concurrency must be positive");
  if (llm.backoff.count() < 0) throw ConfigError("llm.backoff_ms must be nonnegative");
  const bool needs_llm = runs(SystemLabel::nsg) || runs(SystemLabel::glm_direct);
  if (needs_llm && !llm.mock && llm.endpoint.empty()) {
    throw ConfigError("llm.endpoint is required unless llm.mock is set");
  }
  llm.params.validate();
  evolution.validate();
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
    std::string key = text::trim(std::string_view(trimmed).substr(0, eq));
    std::string value = text::trim(std::string_view(trimmed).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("config line {}: empty key", line_no));
    if (!out.emplace(key, std::move(value)).second) {
      throw ConfigError(fmt::format("config line {}: duplicate key '{}'", line_no, key));
    }
  }
  return out;
}

void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value, const fs::path& base_dir) {
  for (const Key& k : keys()) {
    if (k.name == key) {
      k.set(cfg, value, base_dir);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  PipelineConfig cfg;
  const fs::path base = fs::absolute(path).parent_path();
  for (const auto& [key, value] : parse_config_text(buf.str())) apply_setting(cfg, key, value, base);
  return cfg;
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::string out;
  for (const Key& k : keys()) {
    if (k.get) out += fmt::format("{} = {}\n", k.name, k.get(cfg));
  }
  return out;
}

std::vector<SystemLabel> parse_system_list(std::string_view csv) {
  std::vector<SystemLabel> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', start), csv.size());
    const std::string name = text::trim(csv.substr(start, comma - start));
    if (!name.empty()) {
      const SystemLabel s = parse_system(name);
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    start = comma + 1;
  }
  return out;
}

}  // namespace nsg
