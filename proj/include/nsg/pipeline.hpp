#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nsg/config.hpp"
#include "nsg/corpus.hpp"
#include "nsg/llm_gateway.hpp"
#include "nsg/report.hpp"

namespace nsg {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Stage { ingest, extract, evolve, summarize, evaluate };

std::string_view to_string(Stage stage);

/// Any failure inside a stage, labelled with that stage.
class StageFailure : public Error {
 public:
  StageFailure(Stage stage, const std::string& what)
      : Error(std::string(to_string(stage)) + " stage failed: " + what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct RunOptions {
  /// Reuse artifacts already present in the output directory instead of
  /// clearing them first.
  bool resume = false;
  /// Record wall-clock stage timings in the manifest. Off by default so
  /// that reruns are byte-identical.
  bool timings = false;
  /// Called after each per-fragment artifact or checkpoint is written, with
  /// the stage and fragment id (the system name for summary files). Throwing
  /// from it aborts the run, which is how tests simulate a crash.
  std::function<void(Stage, const std::string&)> on_progress;
};

struct SkippedFragment {
  std::string fragment_id;
  std::string reason;
};

struct RunManifest {
  std::string version;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  std::map<std::string, double> timings;  // seconds, empty unless requested
  std::map<std::string, std::size_t> pattern_counts;
  std::vector<std::string> skipped;
  std::vector<std::string> artifacts;  // paths relative to the output directory
};

nlohmann::json manifest_to_json(const RunManifest& m);

struct PipelineOutcome {
  EvaluationReport report;
  RunManifest manifest;
  std::vector<SkippedFragment> skipped;
};

/// Builds the configured model: the mock, or a remote client whose key is
/// read from the environment variable named by llm.api_key_env.
std::unique_ptr<LanguageModel> make_model(const PipelineConfig& cfg);

/// File-system-safe, collision-free file stem for a fragment id.
std::string safe_name(std::string_view fragment_id);

/// Runs fragment-level work on up to `workers` threads. The first exception
/// thrown by `fn` is rethrown once all threads have stopped.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Stage-by-stage driver over one output directory. Every stage reads its
/// inputs from the artifacts of earlier stages, so running the stages one
/// by one yields the same files as run().
class Pipeline {
 public:
  /// `model` overrides make_model(cfg) when given. Throws ConfigError.
  Pipeline(PipelineConfig cfg, RunOptions options = {}, std::shared_ptr<LanguageModel> model = nullptr);

  const Corpus& ingest();
  void extract();
  void evolve();
  void summarize();
  EvaluationReport evaluate();

  /// All stages in order.
  PipelineOutcome run();

  const PipelineConfig& config() const noexcept { return cfg_; }
  const std::vector<SkippedFragment>& skipped() const noexcept { return skipped_; }
  const RunManifest& manifest() const noexcept { return manifest_; }

 private:
  template <typename F>
  auto timed(Stage stage, F&& body);

  LanguageModel& model();
  void prepare_output(Stage first_stage);
  void load_skipped();
  std::vector<std::size_t> active_fragments() const;

  PipelineConfig cfg_;
  RunOptions options_;
  std::shared_ptr<LanguageModel> model_;
  std::filesystem::path out_;
  std::optional<Corpus> corpus_;
  std::vector<SkippedFragment> skipped_;
  RunManifest manifest_;
};

/// Loads `dir`/config.txt with output.dir pointed at `dir`.
PipelineConfig load_run_config(const std::filesystem::path& dir);

}  // namespace nsg
