// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "nsg/evolution.hpp"
#include "nsg/fitness.hpp"
#include "nsg/metrics.hpp"
#include "nsg/remote_model.hpp"
#include "nsg/textrank.hpp"
#include "oracles.hpp"
#include "stub_server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

using Clock = std::chrono::steady_clock;

// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (messages_.size() < 5) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::size_t checks() const { return checks_; }
  std::string summary() const {
    std::string s = std::to_string(failures_) + " of " + std::to_string(checks_) + " checks failed";
    for (const auto& m : messages_) s += "; " + m;
    return s;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

std::string fmt_seconds(Clock::duration d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", std::chrono::duration<double>(d).count());
  return buf;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------
// Metric oracles

void metric_fixtures(Check& c) {
  std::ifstream in(NSG_SOURCE_DIR "/tests/fixtures/metric_cases.json");
  c.expect(static_cast<bool>(in), "fixture file missing");
  if (!in) return;
  const json cases = json::parse(in);
  c.expect(cases.size() >= 12, "fewer than 12 fixture cases");
  auto prf_ok = [](const nsg::PRF& p, const json& w) {
    return near(p.precision, w.at("precision"), 1e-9) && near(p.recall, w.at("recall"), 1e-9) &&
           near(p.f1, w.at("f1"), 1e-9);
  };
  for (const json& k : cases) {
    const std::string metric = k.at("metric");
    const std::string name = k.at("name");
    const auto cand = k.at("candidate").get<nsg::TokenSequence>();
    const auto ref = k.at("reference").get<nsg::TokenSequence>();
    const json& w = k.at("expected");
    bool ok = false;
    if (metric == "rouge1") ok = prf_ok(nsg::rouge_n(cand, ref, 1), w);
    if (metric == "rouge2") ok = prf_ok(nsg::rouge_n(cand, ref, 2), w);
    if (metric == "rougeL") ok = prf_ok(nsg::rouge_l(cand, ref), w);
    if (metric == "bleu" || metric == "bleu_smooth") {
      const auto got = nsg::bleu(cand, ref, nsg::BleuOptions{4, metric == "bleu_smooth"});
      const auto exp = w.at("bleu").get<std::vector<double>>();
      ok = got.size() == 4;
      for (std::size_t i = 0; ok && i < 4; ++i) ok = near(got[i], exp[i], 1e-9);
    }
    if (metric == "overlap") ok = near(nsg::overlap_pct(cand, ref), w.at("overlap"), 1e-9);
    c.expect(ok, "fixture '" + name + "'");
  }

  const auto uni = nsg::ngram_counts({"a", "b", "a"}, 1);
  c.expect(uni.size() == 2 && uni.at({"a"}) == 2 && uni.at({"b"}) == 1, "ngram_counts n=1");
  const auto bi = nsg::ngram_counts({"a", "b", "a"}, 2);
  c.expect(bi.size() == 2 && bi.at({"a", "b"}) == 1 && bi.at({"b", "a"}) == 1, "ngram_counts n=2");
  c.expect(nsg::ngram_counts({"a"}, 2).empty(), "ngram_counts short input");
}

void metric_pair(Check& c, const oracle::Seq& a, const oracle::Seq& b, bool lcs, bool clip) {
  bool ok = true;
  if (lcs) {
    const std::size_t want = oracle::brute_lcs(a, b);
    const nsg::PRF p = nsg::rouge_l(a, b);
    const double r = b.empty() ? 0.0 : static_cast<double>(want) / static_cast<double>(b.size());
    ok = ok && nsg::lcs_length(a, b) == want && near(p.recall, r, 1e-12);
  }
  if (clip) {
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto [m, total] = nsg::clipped_matches(a, b, n);
      ok = ok && m == oracle::brute_clipped(a, b, n) && total == oracle::gram_total(a, n);
    }
    const auto got = nsg::bleu(a, b);
    for (std::size_t k = 1; k <= 4; ++k) ok = ok && near(got[k - 1], oracle::brute_bleu(a, b, k), 1e-12);
    const nsg::PRF r1 = nsg::rouge_n(a, b, 1);
    ok = ok && r1.precision == nsg::rouge_n(b, a, 1).recall && !std::isnan(r1.f1);
  }
  if (ok) {
    c.expect(true, "");
    return;
  }
  std::string sa, sb;
  for (const auto& t : a) sa += t;
  for (const auto& t : b) sb += t;
  c.expect(false, "oracle mismatch on (" + sa + ", " + sb + ")");
}

void metric_oracles(Check& c) {
  metric_fixtures(c);

  const oracle::Seq alphabet{"a", "b", "c"};
  std::vector<std::vector<oracle::Seq>> by_len(11);
  for (std::size_t l = 0; l <= 10; ++l) by_len[l] = oracle::all_sequences(alphabet, l);

  // Exhaustive over every pair whose combined length is at most 10 (LCS) or
  // 8 (clipping), plus every LCS pair with both lengths at most 6.
  std::size_t pairs = 0;
  for (std::size_t la = 0; la <= 10; ++la) {
    for (std::size_t lb = 0; lb <= 10; ++lb) {
      const bool lcs = la + lb <= 10 || std::max(la, lb) <= 6;
      const bool clip = la + lb <= 8;
      if (!lcs && !clip) continue;
      for (const auto& a : by_len[la]) {
        for (const auto& b : by_len[lb]) {
          metric_pair(c, a, b, lcs, clip);
          ++pairs;
        }
      }
    }
  }
  // Every sequence up to the per-sequence bound against a seeded partner of
  // up to the same bound.
  std::mt19937_64 gen(20240601);
  for (std::size_t la = 0; la <= 10; ++la) {
    for (const auto& a : by_len[la]) {
      const std::size_t lcs_len = gen() % 11;
      metric_pair(c, a, by_len[lcs_len][gen() % by_len[lcs_len].size()], true, false);
      if (la <= 8) {
        const std::size_t clip_len = gen() % 9;
        metric_pair(c, a, by_len[clip_len][gen() % by_len[clip_len].size()], false, true);
      }
      pairs += 1 + (la <= 8);
    }
  }
  c.expect(pairs > 1000000, "oracle coverage too small");
}

// ---------------------------------------------------------------------------
// TF-IDF

void tfidf_criterion(Check& c) {
  c.expect(near(nsg::tfidf_value(2, 4, 8), 1.987077860385278, 1e-9), "tfidf(2,4,8)");
  c.expect(near(nsg::tfidf_value(2, 4, 8), std::pow(1.0 + std::log(2.0), 2) * std::log(2.0), 1e-12),
           "tfidf(2,4,8) vs direct formula");
  c.expect(near(nsg::tfidf_value(1, 1, 10), 2.302585092994046, 1e-9), "tfidf(1,1,10)");
  for (std::size_t n : {1u, 2u, 8u, 1000u}) c.expect(nsg::tfidf_value(1, n, n) == 0.0, "tfidf(1,N,N)");

  std::mt19937_64 gen(7);
  int sampled = 0;
  while (sampled < 10000) {
    const std::size_t n = 2 + gen() % 5000;
    const std::size_t global = 1 + gen() % (n - 1);  // global < N: positive idf
    if (global < 2) continue;
    const std::size_t pf = 1 + gen() % (global - 1);
    ++sampled;
    const double lo = nsg::tfidf_value(pf, global, n);
    const double hi = nsg::tfidf_value(pf + 1, global, n);
    c.expect(hi > lo, "monotonicity at (" + std::to_string(pf) + "," + std::to_string(global) + ")");
  }
  c.expect(sampled == 10000, "sample count");
}

// ---------------------------------------------------------------------------
// TextRank

std::vector<std::vector<double>> random_connected_graph(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> weight(0.05, 5.0);
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t j = gen() % i;  // random spanning tree
    w[i][j] = w[j][i] = weight(gen);
  }
  const std::size_t extra = gen() % (n * 2 + 1);
  for (std::size_t e = 0; e < extra; ++e) {
    const std::size_t i = gen() % n;
    const std::size_t j = gen() % n;
    if (i != j) w[i][j] = w[j][i] = weight(gen);
  }
  return w;
}

void textrank_criterion(Check& c) {
  {
    const auto r = nsg::textrank(nsg::WeightedGraph(1));
    c.expect(r.scores.size() == 1 && r.scores[0] == 1.0 - 0.85, "isolated node");
  }
  for (double wt : {0.3, 1.0, 9.0}) {
    nsg::WeightedGraph g(2);
    g.add_weight(0, 1, wt);
    const auto r = nsg::textrank(g);
    c.expect(r.converged && r.iterations <= 100 && near(r.scores[0], 1.0, 1e-6) && near(r.scores[1], 1.0, 1e-6),
             "two-node graph");
  }

  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 19;
    const auto w = random_connected_graph(gen, n);
    nsg::WeightedGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) g.add_weight(i, j, w[i][j]);
    }
    const auto r = nsg::textrank(g);
    double sum = 0.0;
    for (double s : r.scores) sum += s;
    c.expect(std::abs(sum - static_cast<double>(n)) < static_cast<double>(n) * 1e-5,
             "sum identity, trial " + std::to_string(trial));
    for (double s : r.scores) {
      if (!(s >= 1.0 - 0.85 - 1e-12)) c.expect(false, "lower bound 1-d");
    }

    nsg::TextRankOptions tight;
    tight.tolerance = 1e-12;
    tight.max_iterations = 100000;
    const auto precise = nsg::textrank(g, tight);
    const auto power = oracle::textrank_power(w, 0.85);
    const auto solved = oracle::textrank_fixed_point(w, 0.85);
    bool agree = precise.converged;
    for (std::size_t i = 0; i < n; ++i) {
      agree = agree && near(precise.scores[i], power[i], 1e-6) && near(precise.scores[i], solved[i], 1e-6);
    }
    c.expect(agree, "oracle disagreement, trial " + std::to_string(trial));
  }
}

// ---------------------------------------------------------------------------
// Genetic algorithm

nsg::EventPattern random_pattern(std::mt19937_64& gen) {
  std::vector<std::string> roles;
  const int k = static_cast<int>(gen() % 6);
  for (int i = 0; i < k; ++i) roles.push_back("r" + std::to_string(gen() % 14));
  return nsg::EventPattern::make("t" + std::to_string(gen() % 5), roles);
}

nsg::PatternPool random_pool(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<nsg::EventPattern> ps;
  const std::size_t n = 1 + gen() % 32;
  for (std::size_t i = 0; i < n; ++i) ps.push_back(random_pattern(gen));
  return nsg::build_pool("pool" + std::to_string(seed), ps);
}

void ga_criterion(Check& c) {
  std::vector<nsg::PatternPool> pools;
  for (std::uint64_t seed = 0; seed < 100; ++seed) pools.push_back(random_pool(seed));
  const nsg::RoleStats stats = nsg::compute_role_stats(pools);

  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    nsg::EvolutionConfig cfg;
    cfg.max_generations = 50;
    cfg.population_cap = 32;
    cfg.seed = seed;
    c.expect(pools[seed].patterns.size() <= 32, "initial pool within cap");
    nsg::EvolutionRun run(pools[seed], stats, cfg);
    while (!run.done()) {
      run.step();
      if (run.pool().patterns.size() > cfg.population_cap) c.expect(false, "population above cap");
    }
    const nsg::EvolutionResult r = run.result();
    for (std::size_t g = 1; g < r.history.size(); ++g) {
      if (r.history[g].best_q < r.history[g - 1].best_q) {
        c.expect(false, "best-Q decreased, seed " + std::to_string(seed));
        break;
      }
    }
    for (const auto& h : r.history) {
      if (h.population > cfg.population_cap) c.expect(false, "history population above cap");
    }
    c.expect(r.generations_run == 50 || r.stopped_single, "run length");
  }

  std::mt19937_64 gen(4242);
  nsg::Rng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    const nsg::EventPattern a = random_pattern(gen);
    const nsg::EventPattern b = random_pattern(gen);
    const auto [x, y] = nsg::crossover(a, b, rng);
    std::set<std::string> before(a.roles().begin(), a.roles().end());
    before.insert(b.roles().begin(), b.roles().end());
    std::set<std::string> after(x.roles().begin(), x.roles().end());
    after.insert(y.roles().begin(), y.roles().end());
    c.expect(before == after && x.event_type() == a.event_type() && y.event_type() == b.event_type(),
             "crossover conservation, pair " + std::to_string(i));
  }

  nsg::Rng wheel(77);
  const std::vector<double> q{3.0, 1.0};
  const auto picks = nsg::roulette_select(q, 100000, wheel);
  const double p0 = static_cast<double>(std::count(picks.begin(), picks.end(), 0u)) / 100000.0;
  c.expect(picks.size() == 100000 && std::abs(p0 - 0.75) <= 0.01 && std::abs((1.0 - p0) - 0.25) <= 0.01,
           "roulette {3,1}: " + std::to_string(p0));
}

// ---------------------------------------------------------------------------
// End to end through the CLI

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files[fs::relative(e.path(), dir).generic_string()] = buf.str();
  }
  return files;
}

int run_cli(const fs::path& out, const fs::path& log) {
  const std::string cmd = std::string("\"") + NSG_CLI_PATH + "\" run --config \"" NSG_SOURCE_DIR
                          "/configs/mini.conf\" --mock --seed 7 --out \"" + out.string() + "\" > \"" +
                          log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct CliRuns {
  fs::path root;
  fs::path first;
  fs::path second;
  int code_first = -1;
  int code_second = -1;
  Clock::duration elapsed{};
};

CliRuns run_cli_twice() {
  CliRuns r;
  r.root = fs::temp_directory_path() / "nsg_acceptance";
  fs::remove_all(r.root);
  fs::create_directories(r.root);
  r.first = r.root / "run1";
  r.second = r.root / "run2";
  const auto start = Clock::now();
  r.code_first = run_cli(r.first, r.root / "run1.log");
  r.code_second = run_cli(r.second, r.root / "run2.log");
  r.elapsed = Clock::now() - start;
  return r;
}

void determinism_criterion(Check& c, const CliRuns& runs) {
  c.expect(runs.code_first == 0 && runs.code_second == 0,
           "exit codes " + std::to_string(runs.code_first) + "/" + std::to_string(runs.code_second));
  const auto a = snapshot(runs.first);
  const auto b = snapshot(runs.second);
  c.expect(!a.empty() && a.count("report.json") && a.count("manifest.json"), "artifacts missing");
  c.expect(a.size() == b.size(), "file sets differ");
  for (const auto& [name, content] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != content) c.expect(false, "differs: " + name);
  }
  c.expect(runs.elapsed < 30s, "took " + fmt_seconds(runs.elapsed));
}

void e2e_criterion(Check& c, const CliRuns& runs) {
  std::ifstream in(runs.first / "report.json");
  c.expect(static_cast<bool>(in), "report.json missing");
  if (!in) return;
  const json report = json::parse(in);
  const json& systems = report.at("systems");
  for (const char* s : {"tfidf_baseline", "textrank_baseline", "glm_direct", "nsg"}) {
    c.expect(systems.contains(s), std::string("missing system ") + s);
    if (systems.contains(s)) c.expect(systems[s].at("fragments") == 20, std::string("fragment count ") + s);
  }
  if (!systems.contains("tfidf_baseline") || !systems.contains("textrank_baseline") || !systems.contains("nsg") ||
      !systems.contains("glm_direct")) {
    return;
  }
  const double tfidf = systems["tfidf_baseline"].at("overlap_pct");
  const double textrank = systems["textrank_baseline"].at("overlap_pct");
  const double direct = systems["glm_direct"].at("overlap_pct");
  const double nsg = systems["nsg"].at("overlap_pct");
  c.expect(tfidf >= 95.0, "tfidf overlap " + std::to_string(tfidf));
  c.expect(textrank >= 95.0, "textrank overlap " + std::to_string(textrank));
  const double floor = std::min(tfidf, textrank);
  c.expect(direct < floor, "glm_direct overlap " + std::to_string(direct));
  c.expect(nsg < floor, "nsg overlap " + std::to_string(nsg));
  const auto table = snapshot(runs.first).at("report.txt");
  c.expect(table.find("R-1    R-2    R-L    B-1    B-2    B-3    B-4  Overlap") != std::string::npos, "table header");
}

// ---------------------------------------------------------------------------
// Remote gateway against a local stub

void remote_criterion(Check& c) {
  const std::string key = "sk-acceptance-9d2e71b0";
  std::ostringstream log;
  auto logger = std::make_shared<spdlog::logger>("acceptance", std::make_shared<spdlog::sinks::ostream_sink_mt>(log));
  logger->set_level(spdlog::level::debug);
  std::vector<std::chrono::milliseconds> sleeps;
  auto make = [&](const std::string& endpoint) {
    nsg::RemoteSettings s;
    s.endpoint = endpoint;
    s.model = "stub";
    s.api_key = key;
    return nsg::RemoteLanguageModel(s, logger, [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  };
  auto params = [](int retries, std::chrono::milliseconds timeout) {
    nsg::GenerationParams p;
    p.retries = retries;
    p.timeout = timeout;
    return p;
  };

  {
    StubServer server({{500}, {500}, {200, "recovered"}});
    auto m = make(server.endpoint());
    sleeps.clear();
    std::string got;
    try {
      got = m.complete("hello " + key, params(2, 2000ms));
    } catch (const std::exception& e) {
      got = e.what();
    }
    c.expect(got == "recovered", "500,500,200 with retries=2: " + got);
    c.expect(server.hits() == 3, "500,500,200 request count " + std::to_string(server.hits()));
    c.expect(sleeps == std::vector<std::chrono::milliseconds>{500ms, 1000ms}, "backoff schedule");
    c.expect(server.auth_headers().size() == 3 && server.auth_headers()[0] == "Bearer " + key, "bearer header");
  }
  {
    StubServer server({StubServer::Step{500}});
    auto m = make(server.endpoint());
    bool exhausted = false;
    try {
      m.complete("p", params(0, 2000ms));
    } catch (const nsg::TimeoutError&) {
    } catch (const nsg::ExhaustedRetries& e) {
      exhausted = e.attempts() == 1;
    } catch (...) {
    }
    c.expect(exhausted, "retries=0 failure raises ExhaustedRetries");
    c.expect(server.hits() == 1, "retries=0 request count");
  }
  {
    StubServer server({StubServer::Step{503}});
    auto m = make(server.endpoint());
    try {
      m.complete("p", params(3, 2000ms));
    } catch (...) {
    }
    c.expect(server.hits() == 4, "never more than retries+1 requests: " + std::to_string(server.hits()));
  }
  {
    StubServer server({{200, "late", 500ms}});
    auto m = make(server.endpoint());
    bool timeout = false;
    try {
      m.complete("p", params(1, 100ms));
    } catch (const nsg::TimeoutError& e) {
      timeout = e.attempts() == 2;
    } catch (...) {
    }
    c.expect(timeout, "slow server raises TimeoutError");
    c.expect(server.hits() == 2, "timeout request count");
  }
  {
    StubServer server({{401}, {200}});
    auto m = make(server.endpoint());
    int status = 0;
    try {
      m.complete("p", params(3, 2000ms));
    } catch (const nsg::RemoteError& e) {
      status = e.status();
    } catch (...) {
    }
    c.expect(status == 401 && server.hits() == 1, "non-retryable status");
  }
  logger->flush();
  const std::string text = log.str();
  c.expect(!text.empty(), "debug log empty");
  c.expect(text.find(key) == std::string::npos, "API key leaked into logs");
  c.expect(text.find("[REDACTED]") != std::string::npos, "redaction marker missing");
}

// ---------------------------------------------------------------------------

struct Criterion {
  std::string name;
  std::function<void(Check&)> body;
  Clock::duration budget;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  CliRuns runs;
  bool ran_cli = false;
  auto cli = [&]() -> const CliRuns& {
    if (!ran_cli) runs = run_cli_twice();
    ran_cli = true;
    return runs;
  };

  const std::vector<Criterion> criteria = {
      {"metric oracles (fixtures, exhaustive LCS and clipping)", metric_oracles, 10s},
      {"tf-idf fixtures and monotonicity", tfidf_criterion, 1h},
      {"textrank fixtures, sum identity and oracle", textrank_criterion, 1h},
      {"genetic algorithm invariants", ga_criterion, 60s},
      {"determinism of two mock runs", [&](Check& c) { determinism_criterion(c, cli()); }, 1h},
      {"end-to-end overlap sanity", [&](Check& c) { e2e_criterion(c, cli()); }, 1h},
      {"remote gateway contract", remote_criterion, 1h},
  };

  int failed = 0;
  for (const Criterion& cr : criteria) {
    Check check;
    const auto start = Clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const auto took = Clock::now() - start;
    check.expect(took < cr.budget, "over time budget");
    if (check.ok()) {
      std::printf("PASS  %s  [%zu checks, %s]\n", cr.name.c_str(), check.checks(), fmt_seconds(took).c_str());
    } else {
      ++failed;
      std::printf("FAIL  %s  [%s, %s]\n", cr.name.c_str(), check.summary().c_str(), fmt_seconds(took).c_str());
    }
    std::fflush(stdout);
  }
  if (ran_cli) fs::remove_all(runs.root);
  return failed == 0 ? 0 : 1;
}
