#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mdag/enumeration.hpp"
#include "mdag/graph.hpp"
#include "mdag/separation.hpp"
#include "mdag/supports.hpp"

namespace mdag {

enum class Stage : std::uint8_t {
  Hlp,
  Nonmaximal,
  Setwise,
  Subgraph,
  DsepLatentFree,
  EsepLatentFree,
  Supports,
  None,
};

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);

enum class StepKind : std::uint8_t { RemoveEdge, RemoveFacetMember, AddEdge };

/// One rewrite step. RemoveEdge / AddEdge carry an observed edge;
/// RemoveFacetMember carries (facet mask, member).
struct HlpStep {
  StepKind kind;
  int a = 0;  // edge source, or facet member
  int b = 0;  // edge target, unused for facet removal
  NodeMask facet = 0;
};

struct HlpPath {
  std::vector<HlpStep> steps;
  std::vector<NodeMask> final_parents;  // the latent-free endpoint (labelled)
};

struct NonmaximalPair {
  int a = 0, b = 0;
};
struct SetwiseSet {
  NodeMask set = 0;
};
struct DsepProof {
  std::string fingerprint_json;
  int index_n = 0;
  int index_version = 0;
};
struct EsepProof {
  std::vector<NodeMask> partner_parents;  // latent-free DAG with matching d-separations
  int x = 0, y = 0;
  NodeMask z = 0, w = 0;
  bool holds_in_graph = false;  // the side on which the relation holds
};
struct SubgraphWitness {
  NodeMask deleted = 0;
  std::string inner_code;   // canonical code text of the reduced graph
  Stage inner_stage = Stage::None;
};

using Witness = std::variant<std::monostate, HlpPath, NonmaximalPair, SetwiseSet, DsepProof,
                             EsepProof, SupportWitness, SubgraphWitness>;

enum class Status : std::uint8_t { Algebraic, NonAlgebraic, Unresolved };
const char* status_name(Status s);

struct Verdict {
  Status status = Status::Unresolved;
  Stage stage = Stage::None;
  Witness witness;
  int schedule_done = 0;      // supports schedule entries exhausted
  std::string note;           // e.g. timeout reason
};

/// Graphs reachable from m by one rewrite: drop an observed edge, drop one
/// member from one facet, or add an observed edge X->Y where X's parents
/// (facets included) are contained in Y's and X lies in some facet. Results
/// are re-normalized.
std::vector<std::pair<HlpStep, MDag>> hlp_neighbors(const MDag& m);

/// Breadth-first search over the rewrite closure for a latent-free graph
/// with the same d-separation fingerprint. Returns the step path on success.
std::optional<HlpPath> hlp_criterion(const MDag& m);

/// True iff the e-separation fingerprint differs from that of a latent-free
/// DAG sharing the d-separation fingerprint. Requires such a partner.
bool esep_unmatched_via_partner(const MDag& m, const LatentFreeIndex& idx,
                                EsepProof* proof = nullptr);

/// Lookup table of finished verdicts keyed by canonical code bytes.
using VerdictStore = std::map<std::string, Verdict>;

/// Deleting some nonempty observed subset yields a graph whose stored
/// verdict is NonAlgebraic.
std::optional<SubgraphWitness> subgraph_nonalgebraic(const MDag& m,
                                                     const VerdictStore& lower);

struct StageConfig {
  std::vector<Stage> stages = {Stage::Hlp,           Stage::Nonmaximal,
                               Stage::Setwise,        Stage::Subgraph,
                               Stage::DsepLatentFree, Stage::EsepLatentFree,
                               Stage::Supports};
  SupportSchedule schedule;             // defaulted in pipeline
  std::uint64_t solver_budget = 0;      // 0 = unlimited deterministic budget
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  std::string cache_dir;
};

struct ClassifyContext {
  const LatentFreeIndex* index = nullptr;
  const PatternLibrary* patterns = nullptr;
  const VerdictStore* lower = nullptr;  // verdicts for smaller node counts
};

Verdict classify(const MDag& m, const StageConfig& cfg, const ClassifyContext& ctx);

/// Re-derives the witness from scratch; false on any mismatch, never throws.
bool verify_witness(const MDag& m, const Verdict& v, const ClassifyContext& ctx);

}  // namespace mdag
