#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mdag/json_io.hpp"
#include "mdag/pipeline.hpp"

using namespace mdag;

namespace {

// --timeout-secs maps onto a deterministic search-node budget so reports do
// not depend on machine speed
constexpr std::uint64_t kNodesPerSecond = 2'000'000;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Stage> parse_stages(const std::string& spec) {
  std::vector<Stage> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(stage_from_name(tok));
  return out;
}

SupportSchedule parse_schedule(const std::string& spec) {
  SupportSchedule sched;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    ScheduleEntry entry;
    std::uint64_t space = 1;
    for (char c : tok) {
      if (c < '1' || c > '9') throw RangeError("bad cardinality digit in schedule: " + tok);
      entry.cards.push_back(c - '0');
      space *= (std::uint64_t)(c - '0');
    }
    entry.exhaustive = space <= 16;
    if (!entry.exhaustive) {
      // the shipped probe for one ternary node over four observed nodes
      SupportSchedule def = default_schedule((int)entry.cards.size());
      for (const auto& e : def.entries)
        if (e.cards == entry.cards) entry.fixtures = e.fixtures;
    }
    sched.entries.push_back(std::move(entry));
  }
  return sched;
}

ReportFormat parse_format(const std::string& f) {
  if (f == "json") return ReportFormat::Json;
  if (f == "csv") return ReportFormat::Csv;
  if (f == "markdown") return ReportFormat::Markdown;
  throw RangeError("unknown format: " + f);
}

std::string default_cache_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("MDAG_CACHE_DIR");
  return env ? env : "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"census of marginalized DAGs and their algebraicness classification"};
  app.require_subcommand(1);

  std::string cache_dir_flag, stages_flag, schedule_flag, format_flag = "markdown";
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  double timeout_secs = 0;
  app.add_option("--cache-dir", cache_dir_flag, "cache directory (env MDAG_CACHE_DIR)");
  app.add_option("--jobs", jobs, "worker threads");
  app.add_option("--seed", seed, "seed for randomized samplers");
  app.add_option("--stages", stages_flag, "comma list: hlp,nonmaximal,setwise,subgraph,dsep,esep,supports");
  app.add_option("--schedule", schedule_flag, "support cardinality schedule, e.g. 2222,3222");
  app.add_option("--format", format_flag, "json|csv|markdown");
  app.add_option("--timeout-secs", timeout_secs, "per-graph supports budget (deterministic node count)");

  int nodes = 3;
  auto* enumerate_cmd = app.add_subcommand("enumerate", "write the mDAG catalogue for n nodes");
  enumerate_cmd->add_option("--nodes", nodes, "observed node count")->required();

  auto* census_cmd = app.add_subcommand("census", "classify every mDAG on n nodes");
  census_cmd->add_option("--nodes", nodes, "observed node count")->required();

  std::string graph_path, support_path, store_path, out_path;
  int bound = 0;
  auto* classify_cmd = app.add_subcommand("classify-one", "run one graph through the cascade");
  classify_cmd->add_option("--graph", graph_path, "graph JSON file")->required();

  auto* check_cmd = app.add_subcommand("check-support", "decide support compatibility");
  check_cmd->add_option("--graph", graph_path, "graph JSON file")->required();
  check_cmd->add_option("--support", support_path, "support JSON file")->required();
  check_cmd->add_option("--bound", bound, "latent cardinality bound (default |S|)");

  auto* verify_cmd = app.add_subcommand("verify", "re-check every witness in a verdict store");
  verify_cmd->add_option("--store", store_path, "verdict store (JSONL)")->required();

  bool patterns_validate = false;
  auto* patterns_cmd = app.add_subcommand("patterns", "dump or validate the 4-node obstruction fixtures");
  patterns_cmd->add_option("--out", out_path, "write fixture JSONL here");
  patterns_cmd->add_flag("--validate", patterns_validate, "validate a fixture file");
  patterns_cmd->add_option("--file", graph_path, "fixture file to validate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    StageConfig cfg;
    cfg.cache_dir = default_cache_dir(cache_dir_flag);
    cfg.jobs = jobs;
    cfg.seed = seed;
    if (!stages_flag.empty()) cfg.stages = parse_stages(stages_flag);
    if (!schedule_flag.empty()) cfg.schedule = parse_schedule(schedule_flag);
    if (timeout_secs > 0) cfg.solver_budget = (std::uint64_t)(timeout_secs * kNodesPerSecond);

    if (*enumerate_cmd) {
      auto graphs = load_or_enumerate_mdags(nodes, cfg.cache_dir.empty() ? "." : cfg.cache_dir);
      std::cout << graphs.size() << " mDAGs with " << nodes << " observed nodes\n";
      return 0;
    }

    if (*census_cmd) {
      CensusReport report = run_census(nodes, cfg);
      std::cout << emit_report(report, parse_format(format_flag));
      for (auto [s, t] : report.timings)
        std::cerr << "stage " << stage_name(s) << ": " << t << " s\n";
      return 0;
    }

    if (*classify_cmd) {
      MDag m = any_graph_from_json(read_file(graph_path));
      if (cfg.schedule.entries.empty()) cfg.schedule = default_schedule(m.n);
      LatentFreeIndex index = load_or_build_index(m.n, cfg.cache_dir);
      PatternLibrary patterns = PatternLibrary::builtin();
      patterns.validate();
      ClassifyContext ctx;
      ctx.index = &index;
      ctx.patterns = &patterns;
      Verdict v = classify(m, cfg, ctx);
      std::cout << verdict_to_json(canonical_form(m), v) << "\n";
      return 0;
    }

    if (*check_cmd) {
      MDag m = any_graph_from_json(read_file(graph_path));
      Support s = support_from_json(read_file(support_path));
      SolverOptions opts;
      if (cfg.solver_budget) opts.budget = cfg.solver_budget;
      CompatResult r = support_compatible(s, m, bound, opts);
      if (r.compatible) {
        std::cout << "Compatible\n";
        std::cout << "latent cardinality " << r.model.latent_card << ", search nodes "
                  << r.explored << "\n";
      } else {
        std::cout << "Incompatible\n";
        std::cout << "search exhausted after " << r.explored << " nodes\n";
      }
      return 0;
    }

    if (*verify_cmd) {
      VerdictStore store = load_verdict_store(store_path);
      if (store.empty()) {
        std::cerr << "empty or missing store: " << store_path << "\n";
        return 1;
      }
      int checked = 0, failed = 0;
      // group by node count so each index is built once
      std::map<int, LatentFreeIndex> indices;
      PatternLibrary patterns = PatternLibrary::builtin();
      VerdictStore lower;
      for (const auto& [code, v] : store) {
        MDag m = mdag_from_code(CanonicalCode{code});
        if (!indices.count(m.n)) indices[m.n] = load_or_build_index(m.n, cfg.cache_dir);
        ClassifyContext ctx;
        ctx.index = &indices[m.n];
        ctx.patterns = &patterns;
        ctx.lower = &lower;
        ++checked;
        if (!verify_witness(m, v, ctx)) {
          ++failed;
          std::cerr << "verification failed: " << CanonicalCode{code}.text() << "\n";
        }
      }
      std::cout << checked << " verdicts checked, " << failed << " failures\n";
      return failed ? 1 : 0;
    }

    if (*patterns_cmd) {
      PatternLibrary lib =
          patterns_validate && !graph_path.empty() ? PatternLibrary::load_jsonl(graph_path)
                                                   : PatternLibrary::builtin();
      lib.validate();
      if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::trunc);
        f << lib.dump_jsonl();
        std::cout << "wrote " << lib.entries.size() << " patterns to " << out_path << "\n";
      } else if (patterns_validate) {
        std::cout << lib.entries.size() << " patterns validated\n";
      } else {
        std::cout << lib.dump_jsonl();
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
