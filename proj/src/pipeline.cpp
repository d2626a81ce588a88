#include "nsg/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "nsg/baselines.hpp"
#include "nsg/evolution.hpp"
#include "nsg/remote_model.hpp"
#include "nsg/rng.hpp"
#include "nsg/text.hpp"

namespace nsg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::ingest:
      return "ingest";
    case Stage::extract:
      return "extract";
    case Stage::evolve:
      return "evolve";
    case Stage::summarize:
      return "summarize";
    case Stage::evaluate:
      return "evaluate";
  }
  return "unknown";
}

namespace {

constexpr SystemLabel kSystemOrder[] = {SystemLabel::tfidf_baseline, SystemLabel::textrank_baseline,
                                        SystemLabel::glm_direct, SystemLabel::nsg};

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fs::path gen0_path(const fs::path& out, const std::string& id) { return out / "pools" / "gen0" / (safe_name(id) + ".json"); }
fs::path skip_marker(const fs::path& out, const std::string& id) {
  return out / "pools" / "gen0" / (safe_name(id) + ".skipped.json");
}
fs::path final_path(const fs::path& out, const std::string& id) {
  return out / "pools" / "final" / (safe_name(id) + ".json");
}
fs::path checkpoint_path(const fs::path& out, const std::string& id) {
  return out / "checkpoints" / (safe_name(id) + ".json");
}
fs::path summaries_path(const fs::path& out, SystemLabel s) {
  return out / "summaries" / (std::string(to_string(s)) + ".jsonl");
}

// Paths owned by each stage, relative to the output directory.
std::vector<std::string> stage_artifacts(Stage stage) {
  switch (stage) {
    case Stage::ingest:
      return {};
    case Stage::extract:
      return {"pools/gen0", "pools/skipped.json"};
    case Stage::evolve:
      return {"checkpoints", "pools/final", "best_patterns.json"};
    case Stage::summarize:
      return {"summaries", "digest.txt"};
    case Stage::evaluate:
      return {"manifest.json", "report.json", "report.txt"};
  }
  return {};
}

std::vector<std::string> list_files(const fs::path& root) {
  std::vector<std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), root).generic_string();
    if (rel.size() >= 4 && rel.compare(rel.size() - 4, 4, ".tmp") == 0) continue;
    out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string safe_name(std::string_view fragment_id) {
  std::string stem;
  for (char c : fragment_id) {
    if (stem.size() == 48) break;
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    stem.push_back(ok ? c : '_');
  }
  return fmt::format("{}-{:08x}", stem, static_cast<std::uint32_t>(fnv1a64(fragment_id)));
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

json manifest_to_json(const RunManifest& m) {
  json j{{"version", m.version},
         {"seed", m.seed},
         {"config", m.config_snapshot},
         {"pattern_counts", m.pattern_counts},
         {"skipped", m.skipped},
         {"artifacts", m.artifacts}};
  if (!m.timings.empty()) j["timings"] = m.timings;
  return j;
}

std::unique_ptr<LanguageModel> make_model(const PipelineConfig& cfg) {
  if (cfg.llm.mock) return std::make_unique<MockLanguageModel>(cfg.llm.seed);
  RemoteSettings settings;
  settings.endpoint = cfg.llm.endpoint;
  settings.model = cfg.llm.model;
  settings.max_concurrency = cfg.llm.max_concurrency;
  settings.backoff_base = cfg.llm.backoff;
  if (const char* key = std::getenv(cfg.llm.api_key_env.c_str())) {
    settings.api_key = key;
  } else {
    spdlog::warn("environment variable {} is not set; sending requests without a key", cfg.llm.api_key_env);
  }
  return std::make_unique<RemoteLanguageModel>(std::move(settings));
}

PipelineConfig load_run_config(const fs::path& dir) {
  const fs::path file = dir / "config.txt";
  if (!fs::exists(file)) throw ConfigError("no config.txt in '" + dir.string() + "' to resume from");
  PipelineConfig cfg = load_config(file);
  cfg.output_dir = dir;
  return cfg;
}

Pipeline::Pipeline(PipelineConfig cfg, RunOptions options, std::shared_ptr<LanguageModel> model)
    : cfg_(std::move(cfg)), options_(std::move(options)), model_(std::move(model)), out_(cfg_.output_dir) {
  cfg_.validate();
  manifest_.version = std::string(kVersion);
  manifest_.seed = cfg_.evolution.seed;
  manifest_.config_snapshot = serialize_config(cfg_);
}

template <typename F>
auto Pipeline::timed(Stage stage, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    if (!options_.timings) return;
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    manifest_.timings[std::string(to_string(stage))] += took.count();
  };
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      finish();
    } else {
      auto result = body();
      finish();
      return result;
    }
  } catch (const StageFailure&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(stage, e.what());
  }
}

LanguageModel& Pipeline::model() {
  if (!model_) model_ = make_model(cfg_);
  return *model_;
}

void Pipeline::prepare_output(Stage first_stage) {
  fs::create_directories(out_);
  write_atomic(out_ / "config.txt", manifest_.config_snapshot);
  if (options_.resume) return;
  for (Stage s : {Stage::extract, Stage::evolve, Stage::summarize, Stage::evaluate}) {
    if (static_cast<int>(s) < static_cast<int>(first_stage)) continue;
    for (const std::string& rel : stage_artifacts(s)) fs::remove_all(out_ / rel);
  }
}

const Corpus& Pipeline::ingest() {
  if (!corpus_) {
    corpus_ = timed(Stage::ingest, [&] {
      return load_corpus(cfg_.corpus_path, CorpusFormat{cfg_.pens_mapping});
    });
    spdlog::info("ingested {} fragments from {}", corpus_->size(), cfg_.corpus_path.string());
  }
  return *corpus_;
}

void Pipeline::load_skipped() {
  skipped_.clear();
  const fs::path file = out_ / "pools" / "skipped.json";
  if (!fs::exists(file)) return;
  for (const json& s : read_json(file)) {
    skipped_.push_back({s.at("fragment_id").get<std::string>(), s.at("reason").get<std::string>()});
  }
}

std::vector<std::size_t> Pipeline::active_fragments() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus_->size(); ++i) {
    const std::string& id = corpus_->fragments()[i].id;
    const bool skip = std::any_of(skipped_.begin(), skipped_.end(),
                                  [&](const SkippedFragment& s) { return s.fragment_id == id; });
    if (!skip) out.push_back(i);
  }
  return out;
}

void Pipeline::extract() {
  ingest();
  prepare_output(Stage::extract);
  timed(Stage::extract, [&] {
    skipped_.clear();
    if (!cfg_.runs(SystemLabel::nsg)) return;

    std::vector<ContextExemplar> exemplars =
        cfg_.exemplars ? load_exemplars(cfg_.exemplars->string()) : default_exemplars();
    const auto& fragments = corpus_->fragments();
    LanguageModel& llm = model();
    parallel_for(fragments.size(), cfg_.workers, [&](std::size_t i) {
      const NewsFragment& f = fragments[i];
      if (fs::exists(gen0_path(out_, f.id)) || fs::exists(skip_marker(out_, f.id))) return;
      try {
        ExtractionResult r = extract_patterns(llm, f, exemplars, cfg_.per_fragment_target, cfg_.llm.params);
        for (const ParseDiagnostic& d : r.diagnostics) {
          spdlog::debug("fragment {}: reply line {}: {}", f.id, d.line, d.message);
        }
        write_atomic(gen0_path(out_, f.id), dump(pool_to_json(build_pool(f.id, r.patterns))));
      } catch (const NoValidPatterns& e) {
        spdlog::warn("skipping fragment {}: {}", f.id, e.what());
        write_atomic(skip_marker(out_, f.id), dump(json{{"fragment_id", f.id}, {"reason", e.what()}}));
      }
      if (options_.on_progress) options_.on_progress(Stage::extract, f.id);
    });

    json listing = json::array();
    for (const NewsFragment& f : fragments) {
      if (!fs::exists(skip_marker(out_, f.id))) continue;
      const json marker = read_json(skip_marker(out_, f.id));
      skipped_.push_back({f.id, marker.at("reason").get<std::string>()});
      listing.push_back(marker);
    }
    write_atomic(out_ / "pools" / "skipped.json", dump(listing));
  });
}

void Pipeline::evolve() {
  ingest();
  prepare_output(Stage::evolve);
  timed(Stage::evolve, [&] {
    if (!cfg_.runs(SystemLabel::nsg)) return;
    load_skipped();
    const std::vector<std::size_t> active = active_fragments();

    std::vector<PatternPool> pools;
    pools.reserve(active.size());
    for (std::size_t i : active) {
      const std::string& id = corpus_->fragments()[i].id;
      const fs::path file = gen0_path(out_, id);
      if (!fs::exists(file)) throw IoError("missing extracted pool for fragment '" + id + "'; run extract first");
      pools.push_back(pool_from_json(read_json(file)));
    }
    const RoleStats stats = compute_role_stats(pools);

    parallel_for(pools.size(), cfg_.workers, [&](std::size_t k) {
      const std::string& id = pools[k].fragment_id;
      if (fs::exists(final_path(out_, id))) return;
      const fs::path cp_file = checkpoint_path(out_, id);
      std::optional<EvolutionRun> run;
      if (fs::exists(cp_file)) {
        run.emplace(checkpoint_from_json(read_json(cp_file)), cfg_.evolution);
      } else {
        run.emplace(pools[k], stats, cfg_.evolution);
      }
      while (!run->done()) {
        run->step();
        const auto gen = run->pool().generation;
        if (cfg_.checkpoint_every > 0 && !run->done() && gen % static_cast<std::uint64_t>(cfg_.checkpoint_every) == 0) {
          write_atomic(cp_file, dump(checkpoint_to_json(run->checkpoint())));
          if (options_.on_progress) options_.on_progress(Stage::evolve, id);
        }
      }
      write_atomic(final_path(out_, id), dump(json{{"pool", pool_to_json(run->pool())},
                                                   {"result", result_to_json(run->result())}}));
      fs::remove(cp_file);
      if (options_.on_progress) options_.on_progress(Stage::evolve, id);
    });

    json best = json::array();
    for (const PatternPool& p : pools) {
      const json result = read_json(final_path(out_, p.fragment_id)).at("result");
      best.push_back(json{{"fragment_id", p.fragment_id},
                          {"pattern", result.at("best")},
                          {"serialized", result.at("best_pattern")},
                          {"fitness", result.at("best_fitness")}});
    }
    write_atomic(out_ / "best_patterns.json", dump(best));
    if (fs::exists(out_ / "checkpoints") && fs::is_empty(out_ / "checkpoints")) fs::remove(out_ / "checkpoints");
  });
}

void Pipeline::summarize() {
  ingest();
  prepare_output(Stage::summarize);
  timed(Stage::summarize, [&] {
    load_skipped();
    const std::vector<std::size_t> active = active_fragments();
    const auto& fragments = corpus_->fragments();

    std::map<std::string, EventPattern, std::less<>> best;
    if (cfg_.runs(SystemLabel::nsg)) {
      const fs::path file = out_ / "best_patterns.json";
      if (!fs::exists(file)) throw IoError("missing best_patterns.json; run evolve first");
      for (const json& b : read_json(file)) {
        best.emplace(b.at("fragment_id").get<std::string>(), pattern_from_json(b.at("pattern")));
      }
    }
    std::optional<DocumentFrequency> df;
    LanguageModel* llm = nullptr;
    if (cfg_.runs(SystemLabel::nsg) || cfg_.runs(SystemLabel::glm_direct)) llm = &model();

    for (SystemLabel system : kSystemOrder) {
      if (!cfg_.runs(system)) continue;
      const fs::path file = summaries_path(out_, system);
      if (fs::exists(file)) continue;
      if (system == SystemLabel::tfidf_baseline && !df) df.emplace(*corpus_);

      std::vector<std::optional<SummaryRecord>> records(active.size());
      parallel_for(active.size(), cfg_.workers, [&](std::size_t k) {
        const NewsFragment& f = fragments[active[k]];
        switch (system) {
          case SystemLabel::nsg: {
            const auto it = best.find(f.id);
            if (it == best.end()) throw IoError("no best pattern for fragment '" + f.id + "'");
            records[k] = generate_summary(*llm, f, it->second, cfg_.llm.params);
            break;
          }
          case SystemLabel::glm_direct:
            records[k] = generate_summary_direct(*llm, f, cfg_.llm.params);
            break;
          case SystemLabel::tfidf_baseline:
            records[k] = baseline_tfidf_summary(f, *df, cfg_.baseline_max_sentences);
            break;
          case SystemLabel::textrank_baseline:
            records[k] = baseline_textrank_summary(f, cfg_.baseline_max_sentences, cfg_.evolution.fitness.textrank);
            break;
          case SystemLabel::mock:
            break;
        }
      });
      std::string lines;
      for (const auto& r : records) lines += summary_to_json(*r).dump() + "\n";
      write_atomic(file, lines);
      if (options_.on_progress) options_.on_progress(Stage::summarize, std::string(to_string(system)));
    }

    if (cfg_.digest && cfg_.runs(SystemLabel::nsg) && !fs::exists(out_ / "digest.txt")) {
      std::vector<EventPattern> patterns;
      for (std::size_t i : active) patterns.push_back(best.at(fragments[i].id));
      write_atomic(out_ / "digest.txt", text::trim(llm->complete(build_digest_prompt(patterns), cfg_.llm.params)) + "\n");
    }
  });
}

EvaluationReport Pipeline::evaluate() {
  ingest();
  prepare_output(Stage::evaluate);
  return timed(Stage::evaluate, [&] {
    load_skipped();
    std::vector<SummaryRecord> records;
    for (SystemLabel system : kSystemOrder) {
      if (!cfg_.runs(system)) continue;
      const fs::path file = summaries_path(out_, system);
      if (!fs::exists(file)) throw IoError("missing " + file.filename().string() + "; run summarize first");
      std::istringstream in(read_file(file));
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty()) records.push_back(summary_from_json(json::parse(line)));
      }
    }
    EvaluationReport report = nsg::evaluate(records, *corpus_, cfg_.metrics);

    manifest_.pattern_counts.clear();
    if (cfg_.runs(SystemLabel::nsg)) {
      for (std::size_t i : active_fragments()) {
        const std::string& id = corpus_->fragments()[i].id;
        manifest_.pattern_counts[id] = read_json(gen0_path(out_, id)).at("patterns").size();
      }
    }
    manifest_.skipped.clear();
    for (const SkippedFragment& s : skipped_) manifest_.skipped.push_back(s.fragment_id);
    manifest_.artifacts = list_files(out_);
    for (const char* own : {"manifest.json", "report.json", "report.txt"}) manifest_.artifacts.emplace_back(own);
    std::sort(manifest_.artifacts.begin(), manifest_.artifacts.end());
    manifest_.artifacts.erase(std::unique(manifest_.artifacts.begin(), manifest_.artifacts.end()),
                              manifest_.artifacts.end());

    write_atomic(out_ / "manifest.json", dump(manifest_to_json(manifest_)));
    write_atomic(out_ / "report.json", emit_report(report, ReportFormat::json));
    write_atomic(out_ / "report.txt", emit_report(report, ReportFormat::table));
    return report;
  });
}

PipelineOutcome Pipeline::run() {
  ingest();
  extract();
  evolve();
  summarize();
  EvaluationReport report = evaluate();
  return PipelineOutcome{std::move(report), manifest_, skipped_};
}

}  // namespace nsg
