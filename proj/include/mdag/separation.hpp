#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdag/graph.hpp"

namespace mdag {

/// Separation query. W is the deletion set (empty for plain d-separation).
struct SepQuery {
  NodeMask x = 0;
  NodeMask y = 0;
  NodeMask z = 0;
  NodeMask w = 0;
};

enum class FingerprintKind : std::uint8_t { Dsep, Esep };

/// Canonical encoding of a graph's observed singleton-pair separation
/// relations. For d-separation each pair (x < y) carries one bit per
/// conditioning set Z over the remaining observed nodes; for e-separation
/// one bit per disjoint (Z, W) pair. Equality of fingerprints is equality
/// of the relation sets.
struct Fingerprint {
  int n = 0;
  FingerprintKind kind = FingerprintKind::Dsep;
  std::vector<std::uint32_t> pair_bits;  // indexed by pair_index(x, y)

  bool operator==(const Fingerprint&) const = default;
  bool empty() const;
  std::string serialize() const;  // byte-stable hash key
  std::string to_json() const;    // sorted array of [x, y, Zmask(, Wmask)]
  /// Relations as explicit triples (x, y, zmask); d-sep kind only.
  std::vector<std::tuple<int, int, NodeMask>> relations() const;
};

std::size_t pair_index(int x, int y);  // x < y
int pair_count(int n);

/// Flat view of a graph for separation queries: observed nodes first,
/// then one exogenous node per facet.
struct SepView {
  int n_obs = 0;
  int n_total = 0;
  std::vector<NodeMask> parents;
  std::vector<NodeMask> children;
  std::vector<NodeMask> desc;  // reflexive
  std::vector<NodeMask> anc;   // reflexive
};

SepView sep_view(const MDag& m);
SepView sep_view(const Dag& g);

/// Reachability-based d-separation (no path enumeration, no moralization).
/// Latent indices may appear in the query sets.
bool d_separated(const SepView& v, NodeMask x, NodeMask y, NodeMask z);
bool d_separated(const MDag& m, const SepQuery& q);
bool d_separated(const Dag& g, const SepQuery& q);

/// d-separation in the graph with q.w deleted.
bool e_separated(const MDag& m, const SepQuery& q);

Fingerprint dsep_fingerprint(const MDag& m);
Fingerprint dsep_fingerprint(const Dag& g);
Fingerprint esep_fingerprint(const MDag& m);
Fingerprint esep_fingerprint(const Dag& g);

/// Fingerprint under a relabelling of the observed nodes.
Fingerprint permuted(const Fingerprint& fp, const int* perm);

/// One-query separability test for a pair: condition on the union of the
/// observed ancestors of either node.
bool pair_d_separable(const MDag& m, int a, int b);
bool pair_d_separable(const Dag& g, int a, int b);

struct MaximalityResult {
  bool maximal = true;
  int witness_a = -1;  // nonadjacent, not d-separable pair when nonmaximal
  int witness_b = -1;
};
MaximalityResult is_maximal(const MDag& m);
MaximalityResult is_maximal(const Dag& g);

/// Some node (inside the set or latent) is an ancestor of all of `s` in the
/// subgraph keeping only the observed nodes of `s`.
bool setwise_adjacent(const MDag& m, NodeMask s);

/// No pair inside `s` is d-separated by any conditioning set chosen outside
/// of `s`.
bool setwise_d_unrestricted(const MDag& m, NodeMask s);

struct SetwiseResult {
  bool maximal = true;
  NodeMask witness = 0;  // setwise d-unrestricted but not setwise adjacent
};
SetwiseResult is_setwise_maximal(const MDag& m);

}  // namespace mdag
