#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "nsg/config.hpp"
#include "nsg/pipeline.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kStageFailure = 2, kPartial = 3 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool mock = false;
  std::string out;
  std::string resume;
  std::string systems;
  std::optional<int> checkpoint_every;
  bool digest = false;
  bool verbose = false;
  bool timings = false;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "Key-value config file");
  cmd.add_option("--seed", f.seed, "Seed for evolution and the mock model");
  cmd.add_flag("--mock", f.mock, "Use the deterministic mock model");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_option("--resume", f.resume, "Continue the run stored in DIR, reusing its artifacts");
  cmd.add_option("--systems", f.systems, "Comma-separated systems to run");
  cmd.add_option("--checkpoint-every", f.checkpoint_every, "Checkpoint evolution every G generations");
  cmd.add_flag("--digest", f.digest, "Also write a corpus-level digest from all best patterns");
  cmd.add_flag("--timings", f.timings, "Record stage timings in the manifest");
  cmd.add_flag("-v,--verbose", f.verbose, "Debug logging");
}

nsg::PipelineConfig resolve_config(const Flags& f) {
  nsg::PipelineConfig cfg;
  if (!f.resume.empty()) {
    cfg = nsg::load_run_config(f.resume);
  } else if (!f.config.empty()) {
    cfg = nsg::load_config(f.config);
  } else {
    throw nsg::ConfigError("either --config or --resume is required");
  }
  const std::filesystem::path cwd = std::filesystem::current_path();
  if (f.seed) {
    nsg::apply_setting(cfg, "evolution.seed", std::to_string(*f.seed), cwd);
    nsg::apply_setting(cfg, "llm.seed", std::to_string(*f.seed), cwd);
  }
  if (f.mock) nsg::apply_setting(cfg, "llm.mock", "true", cwd);
  if (!f.systems.empty()) nsg::apply_setting(cfg, "systems", f.systems, cwd);
  if (f.checkpoint_every) nsg::apply_setting(cfg, "pipeline.checkpoint_every", std::to_string(*f.checkpoint_every), cwd);
  if (f.digest) nsg::apply_setting(cfg, "pipeline.digest", "true", cwd);
  if (!f.resume.empty()) {
    cfg.output_dir = f.resume;
  } else if (!f.out.empty()) {
    nsg::apply_setting(cfg, "output.dir", f.out, cwd);
  }
  return cfg;
}

int exit_code(const nsg::Pipeline& p) { return p.skipped().empty() ? kOk : kPartial; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"News summary generation guided by evolved event patterns"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::pair<std::string, CLI::App*>> commands;
  for (const char* name : {"run", "ingest", "extract", "evolve", "summarize", "evaluate"}) {
    CLI::App* cmd = app.add_subcommand(name, std::string(name == std::string("run") ? "Run every stage" : "Run one stage"));
    add_common(*cmd, flags);
    commands.emplace_back(name, cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  auto logger = spdlog::stderr_color_mt("nsg");
  spdlog::set_default_logger(logger);
  spdlog::set_level(flags.verbose ? spdlog::level::debug : spdlog::level::info);

  std::string command;
  for (const auto& [name, cmd] : commands) {
    if (cmd->parsed()) command = name;
  }

  try {
    nsg::RunOptions options;
    options.resume = !flags.resume.empty();
    options.timings = flags.timings;
    nsg::Pipeline pipeline(resolve_config(flags), options);

    if (command == "ingest") {
      std::cout << pipeline.ingest().size() << " fragments\n";
      return kOk;
    }
    if (command == "extract") {
      pipeline.extract();
      return exit_code(pipeline);
    }
    if (command == "evolve") {
      pipeline.evolve();
      return kOk;
    }
    if (command == "summarize") {
      pipeline.summarize();
      return kOk;
    }
    if (command == "evaluate") {
      std::cout << nsg::emit_report(pipeline.evaluate(), nsg::ReportFormat::table);
      return exit_code(pipeline);
    }
    const nsg::PipelineOutcome outcome = pipeline.run();
    std::cout << nsg::emit_report(outcome.report, nsg::ReportFormat::table);
    if (!outcome.skipped.empty()) spdlog::warn("{} fragment(s) skipped", outcome.skipped.size());
    return exit_code(pipeline);
  } catch (const nsg::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kStageFailure;
  }
}
