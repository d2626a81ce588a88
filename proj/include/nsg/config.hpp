#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsg/evolution.hpp"
#include "nsg/llm_gateway.hpp"
#include "nsg/report.hpp"

namespace nsg {

struct LlmSettings {
  bool mock = false;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "NSG_API_KEY";
  std::uint64_t seed = 0;
  std::size_t max_concurrency = 4;
  std::chrono::milliseconds backoff{500};
  GenerationParams params;
};

struct PipelineConfig {
  std::filesystem::path corpus_path;
  bool pens_mapping = false;
  std::filesystem::path output_dir = "out";
  std::vector<SystemLabel> systems = {SystemLabel::tfidf_baseline, SystemLabel::textrank_baseline,
                                      SystemLabel::glm_direct, SystemLabel::nsg};
  LlmSettings llm;
  std::size_t per_fragment_target = 8;
  std::optional<std::filesystem::path> exemplars;
  EvolutionConfig evolution;
  std::size_t baseline_max_sentences = 1;
  EvaluateOptions metrics;
  std::size_t workers = 4;
  int checkpoint_every = 0;  // generations between checkpoints; 0 disables
  bool digest = false;

  bool runs(SystemLabel s) const;
  /// Throws ConfigError on any out-of-range or missing setting.
  void validate() const;
};

/// Parses "key = value" lines; '#' starts a comment line. Throws ConfigError
/// (with the line number) on a line without '=' or a repeated key.
std::map<std::string, std::string> parse_config_text(std::string_view text);

/// Applies one setting. Relative paths resolve against `base_dir`. Throws
/// ConfigError on an unknown key or a malformed value.
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value,
                   const std::filesystem::path& base_dir);

/// Defaults overlaid with every key of the file.
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical "key = value" listing of every setting in a fixed key order;
/// output.dir is left out so the snapshot does not depend on where a run
/// writes.
std::string serialize_config(const PipelineConfig& cfg);

std::vector<SystemLabel> parse_system_list(std::string_view csv);

}  // namespace nsg
