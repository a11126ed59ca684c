#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mdag/graph.hpp"
#include "mdag/separation.hpp"

namespace mdag {

inline constexpr int kCacheFormatVersion = 1;

/// Hash index over the d-separation fingerprints of every labelled
/// latent-free DAG on n nodes, plus one representative DAG per fingerprint.
struct LatentFreeIndex {
  int n = 0;
  std::unordered_set<std::string> fingerprints;              // serialized keys
  std::unordered_map<std::string, std::vector<NodeMask>> partner;  // parent masks

  bool contains(const Fingerprint& fp) const { return fingerprints.count(fp.serialize()) != 0; }
  /// Deterministic byte image (sorted, length-prefixed entries).
  std::string serialize() const;
};

/// All labelled acyclic digraphs on n nodes, streamed as parent-mask vectors.
/// 1 <= n <= 6.
void enumerate_latent_free(int n, const std::function<void(const std::vector<NodeMask>&)>& emit);
std::vector<Dag> enumerate_latent_free(int n);

LatentFreeIndex build_latent_free_index(int n);

/// One canonical representative per isomorphism class, sorted by canonical
/// code. 1 <= n <= 5.
std::vector<MDag> enumerate_mdags(int n);
MDag mdag_from_code(const CanonicalCode& code);

/// True iff no labelled latent-free DAG on the same node count realizes the
/// observed d-separation fingerprint of g.
bool dsep_unmatched_in_latent_free(const Fingerprint& fp, const LatentFreeIndex& idx);
template <typename GraphT>
bool dsep_unmatched_in_latent_free(const GraphT& g, const LatentFreeIndex& idx) {
  return dsep_unmatched_in_latent_free(dsep_fingerprint(g), idx);
}

/// The eighteen 4-node obstruction graphs, grouped into five relation-set
/// families.
struct PatternLibrary {
  struct Entry {
    std::string name;  // "a".."r"
    int family = 0;    // 1..5
    MDag graph;
  };
  std::vector<Entry> entries;
  std::vector<std::vector<std::tuple<int, int, NodeMask>>> families;  // sorted relation sets

  static PatternLibrary builtin();
  static PatternLibrary load_jsonl(const std::string& path);
  std::string dump_jsonl() const;
  /// Recomputes every pattern fingerprint and checks it against the declared
  /// family relation set. Throws on mismatch.
  void validate() const;
};

/// Pattern-based test for a maximal mDAG: some 4-subset of observed nodes
/// carries exactly one family relation set (up to relabelling). Agrees with
/// the latent-free index probe on maximal graphs.
bool dsep_unmatched_rapid(const MDag& m, const PatternLibrary& lib);

}  // namespace mdag
