#include "mdag/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "mdag/json_io.hpp"
#include "mdag/parallel.hpp"

namespace mdag {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 15];
    v >>= 4;
  }
  return s;
}

}  // namespace

std::string cache_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return {};
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

std::vector<MDag> load_or_enumerate_mdags(int n, const std::string& cache_dir) {
  std::string path = cache_path(cache_dir, "mdags-n" + std::to_string(n) + ".jsonl");
  if (!path.empty() && fs::exists(path)) {
    std::ifstream in(path);
    std::string line, payload;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.size() < 2) throw CacheCorruptionError("mdag cache truncated: " + path);
    json tail = json::parse(lines.back());
    for (std::size_t i = 0; i + 1 < lines.size(); ++i) payload += lines[i] + "\n";
    if (tail.value("checksum", "") != hex64(fnv1a64(payload)))
      throw CacheCorruptionError("mdag cache checksum mismatch: " + path);
    json head = json::parse(lines.front());
    if (head.value("n", -1) != n || head.value("version", -1) != kCacheFormatVersion)
      throw CacheCorruptionError("mdag cache header mismatch: " + path);
    std::vector<MDag> out;
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) out.push_back(mdag_from_json(lines[i]));
    if ((int)out.size() != head.value("count", -1))
      throw CacheCorruptionError("mdag cache count mismatch: " + path);
    return out;
  }
  std::vector<MDag> out = enumerate_mdags(n);
  if (!path.empty()) {
    std::ostringstream body;
    body << json{{"cache", "mdags"}, {"n", n}, {"version", kCacheFormatVersion},
                 {"count", out.size()}}
                .dump()
         << "\n";
    for (const MDag& m : out) body << mdag_to_json(m) << "\n";
    std::ofstream f(path, std::ios::trunc);
    f << body.str() << json{{"checksum", hex64(fnv1a64(body.str()))}}.dump() << "\n";
  }
  return out;
}

LatentFreeIndex load_or_build_index(int n, const std::string& cache_dir) {
  std::string path = cache_path(cache_dir, "lfdsep-index-n" + std::to_string(n) + ".bin");
  if (!path.empty() && fs::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 16) throw CacheCorruptionError("index cache truncated: " + path);
    std::string payload = data.substr(0, data.size() - 16);
    if (data.substr(data.size() - 16) != hex64(fnv1a64(payload)))
      throw CacheCorruptionError("index cache checksum mismatch: " + path);
    if (payload.size() < 7 || payload.compare(0, 5, "LFIDX") != 0 ||
        payload[5] != (char)kCacheFormatVersion || payload[6] != (char)n)
      throw CacheCorruptionError("index cache header mismatch: " + path);
    LatentFreeIndex idx;
    idx.n = n;
    std::size_t pos = 7;
    while (pos < payload.size()) {
      std::size_t len = (unsigned char)payload[pos++];
      if (pos + len + n > payload.size())
        throw CacheCorruptionError("index cache entry truncated: " + path);
      std::string key = payload.substr(pos, len);
      pos += len;
      std::vector<NodeMask> pm(n);
      for (int v = 0; v < n; ++v) pm[v] = (NodeMask)(unsigned char)payload[pos++];
      idx.fingerprints.insert(key);
      idx.partner[key] = std::move(pm);
    }
    return idx;
  }
  LatentFreeIndex idx = build_latent_free_index(n);
  if (!path.empty()) {
    std::string payload = idx.serialize();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << payload << hex64(fnv1a64(payload));
  }
  return idx;
}

VerdictStore load_verdict_store(const std::string& path) {
  VerdictStore store;
  if (path.empty() || !fs::exists(path)) return store;
  std::ifstream in(path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  if (lines.empty()) return store;

  // A cleanly finalized store ends in a checksum line covering everything
  // before it. Interrupted runs append verdict lines past the old checksum
  // (or tear the last line); those are accepted, later lines win.
  bool clean = false;
  try {
    json tail = json::parse(lines.back());
    if (tail.contains("checksum")) {
      std::string payload;
      for (std::size_t i = 0; i + 1 < lines.size(); ++i) payload += lines[i] + "\n";
      if (tail["checksum"].get<std::string>() != hex64(fnv1a64(payload)))
        throw CacheCorruptionError("verdict store checksum mismatch: " + path);
      lines.pop_back();
      clean = true;
    }
  } catch (const json::exception&) {
    lines.pop_back();  // torn tail line
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      json j = json::parse(lines[i]);
      if (j.contains("checksum")) continue;  // stale finalize marker mid-file
      auto [code, verdict] = verdict_from_json(lines[i]);
      store[code] = std::move(verdict);
    } catch (const json::exception&) {
      if (clean || i + 1 < lines.size())
        throw CacheCorruptionError("verdict store line corrupt: " + path);
      break;  // torn final line of an interrupted run
    }
  }
  return store;
}

void write_verdict_store(const std::string& path, const CensusReport& r) {
  if (path.empty()) return;
  std::ostringstream body;
  for (const auto& [code, v] : r.verdicts) body << verdict_to_json(code, v) << "\n";
  std::ofstream f(path, std::ios::trunc);
  f << body.str() << json{{"checksum", hex64(fnv1a64(body.str()))}}.dump() << "\n";
}

namespace {

// stage timing accumulation is display-only
struct StageClock {
  std::vector<std::pair<Stage, double>> totals;
  void add(Stage s, double secs) {
    for (auto& [st, t] : totals)
      if (st == s) {
        t += secs;
        return;
      }
    totals.emplace_back(s, secs);
  }
};

Verdict classify_timed(const MDag& m, const StageConfig& cfg, const ClassifyContext& ctx,
                       StageClock* clock) {
  if (!clock) return classify(m, cfg, ctx);
  // run the cascade stage by stage to attribute wall time
  Verdict out;
  for (Stage s : cfg.stages) {
    StageConfig one = cfg;
    one.stages = {s};
    auto t0 = std::chrono::steady_clock::now();
    Verdict v = classify(m, one, ctx);
    auto t1 = std::chrono::steady_clock::now();
    clock->add(s, std::chrono::duration<double>(t1 - t0).count());
    if (v.status != Status::Unresolved) return v;
    out.schedule_done = std::max(out.schedule_done, v.schedule_done);
    if (!v.note.empty()) out.note = v.note;
  }
  return out;
}

}  // namespace

CensusReport run_census(int n, const StageConfig& cfg_in) {
  if (n < 1 || n > 5) throw RangeError("census supports 1..5 observed nodes");
  StageConfig cfg = cfg_in;
  if (cfg.schedule.entries.empty()) cfg.schedule = default_schedule(n);

  CensusReport report;
  report.n = n;

  std::vector<MDag> graphs = load_or_enumerate_mdags(n, cfg.cache_dir);
  report.total = graphs.size();

  bool needs_index = false, needs_lower = false;
  for (Stage s : cfg.stages) {
    if (s == Stage::DsepLatentFree || s == Stage::EsepLatentFree) needs_index = true;
    if (s == Stage::Subgraph && n >= 5) needs_lower = true;
  }

  LatentFreeIndex index;
  PatternLibrary patterns = PatternLibrary::builtin();
  patterns.validate();
  if (needs_index) index = load_or_build_index(n, cfg.cache_dir);

  VerdictStore lower;
  if (needs_lower) {
    for (int k = 1; k < n; ++k) {
      std::string lp = cache_path(cfg.cache_dir, "verdicts-n" + std::to_string(k) + ".jsonl");
      VerdictStore part = load_verdict_store(lp);
      if (part.empty()) {
        StageConfig sub = cfg;
        sub.stages.erase(std::remove(sub.stages.begin(), sub.stages.end(), Stage::Subgraph),
                         sub.stages.end());
        sub.schedule = default_schedule(k);
        CensusReport r = run_census(k, sub);
        for (auto& [code, v] : r.verdicts) lower[code.bytes] = v;
      } else {
        for (auto& [code, v] : part) lower[code] = v;
      }
    }
  }

  ClassifyContext ctx;
  ctx.index = needs_index ? &index : nullptr;
  ctx.patterns = &patterns;
  ctx.lower = needs_lower ? &lower : nullptr;

  std::string store_path =
      cache_path(cfg.cache_dir, "verdicts-n" + std::to_string(n) + ".jsonl");
  VerdictStore done = load_verdict_store(store_path);

  std::vector<Verdict> results(graphs.size());
  std::vector<StageClock> clocks(std::max(1u, cfg.jobs));
  std::atomic<unsigned> clock_slot{0};

  // verdicts stream to the store in canonical order as they complete, so a
  // killed run resumes from what reached disk
  struct Collector {
    std::mutex mu;
    std::ofstream out;
    std::vector<std::string> lines;
    std::vector<std::uint8_t> ready;
    std::size_t next = 0;
    void push(std::size_t i, std::string line) {
      std::lock_guard<std::mutex> lk(mu);
      lines[i] = std::move(line);
      ready[i] = 1;
      while (next < ready.size() && ready[next]) {
        if (out.is_open()) out << lines[next] << "\n";
        ++next;
      }
      if (out.is_open()) out.flush();
    }
  } collector;
  collector.lines.resize(graphs.size());
  collector.ready.assign(graphs.size(), 0);
  if (!store_path.empty()) collector.out.open(store_path, std::ios::app);

  parallel_for(graphs.size(), cfg.jobs, [&](std::size_t i) {
    thread_local unsigned slot = clock_slot.fetch_add(1) % clocks.size();
    const MDag& m = graphs[i];
    CanonicalCode code = canonical_form(m);
    auto it = done.find(code.bytes);
    if (it != done.end()) {
      const Verdict& old = it->second;
      bool reenter = old.status == Status::Unresolved && old.note.empty() &&
                     old.schedule_done < (int)cfg.schedule.entries.size();
      if (!reenter) {
        results[i] = old;
        collector.push(i, verdict_to_json(code, results[i]));
        return;
      }
      StageConfig resume = cfg;
      resume.stages = {Stage::Supports};
      resume.schedule.entries.assign(cfg.schedule.entries.begin() + old.schedule_done,
                                     cfg.schedule.entries.end());
      Verdict v = classify_timed(m, resume, ctx, &clocks[slot]);
      v.schedule_done += old.schedule_done;
      results[i] = v;
      collector.push(i, verdict_to_json(code, results[i]));
      return;
    }
    results[i] = classify_timed(m, cfg, ctx, &clocks[slot]);
    collector.push(i, verdict_to_json(code, results[i]));
  });
  if (collector.out.is_open()) collector.out.close();

  report.verdicts.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i)
    report.verdicts.emplace_back(canonical_form(graphs[i]), results[i]);

  std::size_t remaining = report.total;
  for (Stage s : cfg.stages) {
    std::size_t fired = 0;
    for (const auto& [code, v] : report.verdicts)
      if (v.stage == s && v.status != Status::Unresolved) ++fired;
    remaining -= fired;
    report.survivors_after.emplace_back(s, remaining);
  }

  StageClock merged;
  for (const auto& c : clocks)
    for (auto [s, t] : c.totals) merged.add(s, t);
  report.timings = merged.totals;

  write_verdict_store(store_path, report);
  return report;
}

bool reports_equal(const CensusReport& a, const CensusReport& b) {
  return emit_report(a, ReportFormat::Json) == emit_report(b, ReportFormat::Json);
}

namespace {

std::string stage_row_label(Stage s) {
  switch (s) {
    case Stage::Hlp: return "remaining # for which the HLP criterion does not apply";
    case Stage::Nonmaximal:
      return "remaining # for which the nonmaximality condition does not apply";
    case Stage::Setwise:
      return "remaining # for which the setwise nonmaximality condition does not apply";
    case Stage::Subgraph: return "remaining # without a smaller non-algebraic subgraph";
    case Stage::DsepLatentFree:
      return "remaining # for which the d-separation condition does not apply";
    case Stage::EsepLatentFree:
      return "remaining # for which the e-separation condition does not apply";
    case Stage::Supports: return "remaining # not resolved by the supports search";
    case Stage::None: break;
  }
  return "remaining #";
}

}  // namespace

std::string emit_report(const CensusReport& r, ReportFormat fmt) {
  switch (fmt) {
    case ReportFormat::Json: {
      json j;
      j["n"] = r.n;
      j["total"] = r.total;
      json surv = json::array();
      for (auto [s, c] : r.survivors_after)
        surv.push_back(json{{"stage", stage_name(s)}, {"survivors", c}});
      j["survivors_after"] = surv;
      json verdicts = json::array();
      for (const auto& [code, v] : r.verdicts) verdicts.push_back(json::parse(verdict_to_json(code, v)));
      j["verdicts"] = verdicts;
      return j.dump() + "\n";
    }
    case ReportFormat::Csv: {
      std::ostringstream os;
      os << "category,count\n";
      os << "Total Count," << r.total << "\n";
      for (auto [s, c] : r.survivors_after) os << stage_row_label(s) << "," << c << "\n";
      return os.str();
    }
    case ReportFormat::Markdown: {
      std::ostringstream os;
      os << "| Category | mDAGs with " << r.n << " observed nodes |\n";
      os << "|---|---|\n";
      os << "| Total Count | " << r.total << " |\n";
      for (auto [s, c] : r.survivors_after)
        os << "| " << stage_row_label(s) << " | " << c << " |\n";
      return os.str();
    }
  }
  return {};
}

CensusReport report_from_json(const std::string& text) {
  json j = json::parse(text);
  CensusReport r;
  r.n = j.at("n").get<int>();
  r.total = j.at("total").get<std::size_t>();
  for (const auto& s : j.at("survivors_after"))
    r.survivors_after.emplace_back(stage_from_name(s.at("stage").get<std::string>()),
                                   s.at("survivors").get<std::size_t>());
  for (const auto& v : j.at("verdicts")) {
    auto [code, verdict] = verdict_from_json(v.dump());
    r.verdicts.emplace_back(CanonicalCode{code}, std::move(verdict));
  }
  return r;
}

}  // namespace mdag
