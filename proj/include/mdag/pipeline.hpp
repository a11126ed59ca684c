#pragma once

#include <string>
#include <vector>

#include "mdag/classify.hpp"

namespace mdag {

enum class ReportFormat { Json, Csv, Markdown };

struct CensusReport {
  int n = 0;
  std::size_t total = 0;
  std::vector<std::pair<Stage, std::size_t>> survivors_after;  // stage order
  std::vector<std::pair<CanonicalCode, Verdict>> verdicts;     // canonical order
  std::vector<std::pair<Stage, double>> timings;               // seconds; not serialized
};

bool reports_equal(const CensusReport& a, const CensusReport& b);

/// Enumerates, classifies and persists all mDAGs on n observed nodes.
/// Resumable: finished verdicts are loaded from the store; unresolved ones
/// re-enter the supports schedule at their recorded position.
CensusReport run_census(int n, const StageConfig& cfg);

std::string emit_report(const CensusReport& r, ReportFormat fmt);
CensusReport report_from_json(const std::string& text);

// cache helpers (no-ops when dir is empty)
std::string cache_path(const std::string& dir, const std::string& name);
std::vector<MDag> load_or_enumerate_mdags(int n, const std::string& cache_dir);
LatentFreeIndex load_or_build_index(int n, const std::string& cache_dir);
VerdictStore load_verdict_store(const std::string& path);
void write_verdict_store(const std::string& path, const CensusReport& r);

std::uint64_t fnv1a64(const std::string& data);

}  // namespace mdag
