#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdag/bits.hpp"
#include "mdag/errors.hpp"

namespace mdag {

using Edge = std::pair<int, int>;

enum class Relation { Parents, Children, Ancestors, Descendants };

/// A DAG with explicit latent nodes. Observed nodes occupy indices
/// 0..n_obs-1, latents come after. Immutable once built; ancestor and
/// descendant closures are cached at construction.
struct Dag {
  int n_obs = 0;
  int n_lat = 0;
  std::vector<NodeMask> parents;   // per node, mask over all nodes
  std::vector<NodeMask> children;  // per node, mask over all nodes
  std::vector<NodeMask> anc;       // reflexive ancestor closure
  std::vector<NodeMask> desc;      // reflexive descendant closure
  std::vector<int> topo;           // one topological order

  int total() const { return n_obs + n_lat; }
  bool is_latent(int v) const { return v >= n_obs; }
  std::vector<Edge> edge_list() const;
};

/// Marginalized DAG: directed edges among observed nodes plus an antichain
/// of latent facets (each facet is the children set of one exogenous latent).
/// Facets are sorted, deduplicated, size >= 2, and no facet contains another.
/// Values are immutable after construction; derived tables are built eagerly.
struct MDag {
  int n = 0;
  std::vector<NodeMask> obs_parents;  // size n, masks over observed nodes
  std::vector<NodeMask> facets;       // ascending mask order

  // Eager caches (observed-edge closures; facet adjacency folded into adj).
  std::vector<NodeMask> anc;   // reflexive, via observed edges only
  std::vector<NodeMask> desc;  // reflexive, via observed edges only
  std::vector<NodeMask> adj;   // adjacency: edges either way or shared facet

  int edge_count() const;
  bool has_edge(int u, int v) const { return u != v && has_bit(obs_parents[v], u); }
  bool latent_free() const { return facets.empty(); }
  std::vector<Edge> edge_list() const;
  bool operator==(const MDag& o) const {
    return n == o.n && obs_parents == o.obs_parents && facets == o.facets;
  }
};

/// Canonical byte encoding of an MDag, invariant under relabelling of the
/// observed nodes. Equal codes == isomorphic graphs.
struct CanonicalCode {
  std::string bytes;
  auto operator<=>(const CanonicalCode&) const = default;
  std::string text() const;  // printable form used in reports and stores
};

Dag build_dag(int n_obs, int n_lat, const std::vector<Edge>& edges);

/// Parents/children exclude the node itself; ancestors/descendants include it.
NodeMask relatives(const Dag& g, int node, Relation kind);

/// Reroutes every parent of `latent` to every child of `latent` and cuts the
/// incoming edges, leaving the latent exogenous. Node count is unchanged.
Dag exogenize(const Dag& g, int latent);

/// Canonical reduction: exogenize all latents, drop redundant ones (children
/// set contained in another latent's children set) and latents with fewer
/// than two children, keep the surviving children sets as facets.
MDag to_mdag(const Dag& g);

/// Validating constructor: throws if edges cycle, a facet has size < 2, or
/// the facets are not an antichain.
MDag make_mdag(int n, const std::vector<Edge>& edges, const std::vector<NodeMask>& facets);

/// Normalizing constructor: sorts/dedups facets, drops small and contained
/// ones. Edges must still be acyclic.
MDag normalize_mdag(int n, std::vector<NodeMask> parent_masks, std::vector<NodeMask> facets);

/// Realizes facets as explicit exogenous latent nodes.
Dag embed(const MDag& m);

/// Removes the observed nodes in `drop` (edges and facet memberships too),
/// re-normalizes facets, and compacts the remaining indices in order.
MDag delete_observed(const MDag& m, NodeMask drop);
Dag delete_observed(const Dag& g, NodeMask drop);

/// True iff a->b, b->a, or some facet contains both.
bool adjacent(const MDag& m, int a, int b);

MDag permuted(const MDag& m, const int* perm);
CanonicalCode canonical_form(const MDag& m);

/// All observed-node permutations mapping the graph onto itself.
std::vector<std::vector<int>> automorphisms(const MDag& m);

}  // namespace mdag
