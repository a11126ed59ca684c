#include "mdag/graph.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace mdag {

std::vector<Edge> Dag::edge_list() const {
  std::vector<Edge> out;
  for (int v = 0; v < total(); ++v)
    for_each_bit(parents[v], [&](int u) { out.emplace_back(u, v); });
  std::sort(out.begin(), out.end());
  return out;
}

int MDag::edge_count() const {
  int c = 0;
  for (NodeMask pm : obs_parents) c += popcount(pm);
  return c;
}

std::vector<Edge> MDag::edge_list() const {
  std::vector<Edge> out;
  for (int v = 0; v < n; ++v)
    for_each_bit(obs_parents[v], [&](int u) { out.emplace_back(u, v); });
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Reflexive transitive closure along children masks.
void close_down(int total, const std::vector<NodeMask>& children, std::vector<NodeMask>& desc,
                const std::vector<int>& rev_topo) {
  desc.assign(total, 0);
  for (int v : rev_topo) {
    NodeMask d = bit(v);
    for_each_bit(children[v], [&](int c) { d |= desc[c]; });
    desc[v] = d;
  }
}

std::vector<int> topo_order(int total, const std::vector<NodeMask>& parents) {
  std::vector<int> indeg(total);
  for (int v = 0; v < total; ++v) indeg[v] = popcount(parents[v]);
  std::vector<int> order;
  order.reserve(total);
  std::vector<NodeMask> children(total, 0);
  for (int v = 0; v < total; ++v)
    for_each_bit(parents[v], [&](int u) { children[u] |= bit(v); });
  std::vector<int> queue;
  for (int v = 0; v < total; ++v)
    if (indeg[v] == 0) queue.push_back(v);
  while (!queue.empty()) {
    // smallest-first pop keeps the order deterministic
    std::sort(queue.begin(), queue.end(), std::greater<int>());
    int v = queue.back();
    queue.pop_back();
    order.push_back(v);
    for_each_bit(children[v], [&](int c) {
      if (--indeg[c] == 0) queue.push_back(c);
    });
  }
  return order;  // shorter than total iff there is a cycle
}

void finalize_dag(Dag& g) {
  int t = g.total();
  g.children.assign(t, 0);
  for (int v = 0; v < t; ++v)
    for_each_bit(g.parents[v], [&](int u) { g.children[u] |= bit(v); });
  g.topo = topo_order(t, g.parents);
  if ((int)g.topo.size() != t) throw CycleError("edge set contains a directed cycle");
  std::vector<int> rev(g.topo.rbegin(), g.topo.rend());
  close_down(t, g.children, g.desc, rev);
  // ancestor closure: mirror of desc
  g.anc.assign(t, 0);
  for (int v = 0; v < t; ++v)
    for_each_bit(g.desc[v], [&](int d) { g.anc[d] |= bit(v); });
}

}  // namespace

Dag build_dag(int n_obs, int n_lat, const std::vector<Edge>& edges) {
  if (n_obs < 0 || n_lat < 0) throw IndexError("negative node count");
  Dag g;
  g.n_obs = n_obs;
  g.n_lat = n_lat;
  int t = g.total();
  g.parents.assign(t, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= t || v >= t) throw IndexError("edge index out of range");
    if (u == v) throw CycleError("self-loop");
    g.parents[v] |= bit(u);
  }
  finalize_dag(g);
  return g;
}

NodeMask relatives(const Dag& g, int node, Relation kind) {
  if (node < 0 || node >= g.total()) throw IndexError("node out of range");
  switch (kind) {
    case Relation::Parents: return g.parents[node];
    case Relation::Children: return g.children[node];
    case Relation::Ancestors: return g.anc[node];
    case Relation::Descendants: return g.desc[node];
  }
  return 0;
}

Dag exogenize(const Dag& g, int latent) {
  if (latent < g.n_obs || latent >= g.total()) throw NotLatentError("node is not latent");
  Dag out = g;
  NodeMask pa = g.parents[latent];
  if (pa) {
    for_each_bit(g.children[latent], [&](int c) { out.parents[c] |= pa; });
    out.parents[latent] = 0;
  }
  finalize_dag(out);
  return out;
}

MDag to_mdag(const Dag& g) {
  // One pass in topological order leaves every latent exogenous.
  Dag cur = g;
  for (int v : cur.topo) {
    if (cur.is_latent(v) && cur.parents[v]) cur = exogenize(cur, v);
  }
  NodeMask obs_mask = full_mask(cur.n_obs);
  std::vector<NodeMask> facets;
  for (int l = cur.n_obs; l < cur.total(); ++l) facets.push_back(cur.children[l] & obs_mask);
  std::vector<NodeMask> pm(cur.n_obs);
  for (int v = 0; v < cur.n_obs; ++v) pm[v] = cur.parents[v] & obs_mask;
  return normalize_mdag(cur.n_obs, std::move(pm), std::move(facets));
}

MDag normalize_mdag(int n, std::vector<NodeMask> parent_masks, std::vector<NodeMask> facets) {
  MDag m;
  m.n = n;
  m.obs_parents = std::move(parent_masks);
  std::sort(facets.begin(), facets.end());
  facets.erase(std::unique(facets.begin(), facets.end()), facets.end());
  std::vector<NodeMask> keep;
  for (NodeMask f : facets) {
    if (popcount(f) < 2) continue;
    bool contained = false;
    for (NodeMask g : facets)
      if (g != f && (f & g) == f) {
        contained = true;
        break;
      }
    if (!contained) keep.push_back(f);
  }
  m.facets = std::move(keep);

  if ((int)topo_order(n, m.obs_parents).size() != n)
    throw CycleError("edge set contains a directed cycle");
  std::vector<NodeMask> children(n, 0);
  for (int v = 0; v < n; ++v)
    for_each_bit(m.obs_parents[v], [&](int u) { children[u] |= bit(v); });
  auto order = topo_order(n, m.obs_parents);
  std::vector<int> rev(order.rbegin(), order.rend());
  close_down(n, children, m.desc, rev);
  m.anc.assign(n, 0);
  for (int v = 0; v < n; ++v)
    for_each_bit(m.desc[v], [&](int d) { m.anc[d] |= bit(v); });
  m.adj.assign(n, 0);
  for (int v = 0; v < n; ++v) m.adj[v] = m.obs_parents[v] | children[v];
  for (NodeMask f : m.facets)
    for_each_bit(f, [&](int v) { m.adj[v] |= f & ~bit(v); });
  return m;
}

MDag make_mdag(int n, const std::vector<Edge>& edges, const std::vector<NodeMask>& facets) {
  std::vector<NodeMask> pm(n, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw IndexError("edge index out of range");
    if (u == v) throw CycleError("self-loop");
    pm[v] |= bit(u);
  }
  for (NodeMask f : facets) {
    if (popcount(f) < 2) throw SizeError("facet smaller than two nodes");
    if (f & ~full_mask(n)) throw IndexError("facet member out of range");
  }
  for (NodeMask f : facets)
    for (NodeMask g : facets)
      if (f != g && (f & g) == f) throw SizeError("facets must form an antichain");
  return normalize_mdag(n, std::move(pm), facets);
}

Dag embed(const MDag& m) {
  std::vector<Edge> edges = m.edge_list();
  int l = m.n;
  for (NodeMask f : m.facets) {
    for_each_bit(f, [&](int v) { edges.emplace_back(l, v); });
    ++l;
  }
  return build_dag(m.n, (int)m.facets.size(), edges);
}

MDag delete_observed(const MDag& m, NodeMask drop) {
  drop &= full_mask(m.n);
  NodeMask keep = full_mask(m.n) & ~drop;
  std::array<int, 32> remap{};
  int nn = 0;
  for (int v = 0; v < m.n; ++v)
    if (has_bit(keep, v)) remap[v] = nn++;
  auto shrink = [&](NodeMask mask) {
    NodeMask out = 0;
    for_each_bit(mask & keep, [&](int v) { out |= bit(remap[v]); });
    return out;
  };
  std::vector<NodeMask> pm(nn, 0);
  for (int v = 0; v < m.n; ++v)
    if (has_bit(keep, v)) pm[remap[v]] = shrink(m.obs_parents[v]);
  std::vector<NodeMask> facets;
  facets.reserve(m.facets.size());
  for (NodeMask f : m.facets) facets.push_back(shrink(f));
  return normalize_mdag(nn, std::move(pm), std::move(facets));
}

Dag delete_observed(const Dag& g, NodeMask drop) {
  drop &= full_mask(g.n_obs);
  std::array<int, 32> remap{};
  int nn = 0;
  for (int v = 0; v < g.n_obs; ++v)
    if (!has_bit(drop, v)) remap[v] = nn++;
  for (int v = g.n_obs; v < g.total(); ++v) remap[v] = nn + (v - g.n_obs);
  std::vector<Edge> edges;
  for (auto [u, v] : g.edge_list())
    if (!(u < g.n_obs && has_bit(drop, u)) && !(v < g.n_obs && has_bit(drop, v)))
      edges.emplace_back(remap[u], remap[v]);
  return build_dag(nn, g.n_lat, edges);
}

bool adjacent(const MDag& m, int a, int b) {
  if (a < 0 || b < 0 || a >= m.n || b >= m.n) throw IndexError("node out of range");
  if (a == b) throw IndexError("adjacency needs two distinct nodes");
  return has_bit(m.adj[a], b);
}

MDag permuted(const MDag& m, const int* perm) {
  std::vector<NodeMask> pm(m.n, 0);
  for (int v = 0; v < m.n; ++v) pm[perm[v]] = permute_mask(m.obs_parents[v], perm);
  std::vector<NodeMask> facets;
  facets.reserve(m.facets.size());
  for (NodeMask f : m.facets) facets.push_back(permute_mask(f, perm));
  return normalize_mdag(m.n, std::move(pm), std::move(facets));
}

namespace {

void encode_labelled(const MDag& m, const int* perm, std::string& out) {
  out.clear();
  out.push_back((char)m.n);
  std::array<unsigned char, 6> pm{};
  for (int v = 0; v < m.n; ++v) pm[perm[v]] = (unsigned char)permute_mask(m.obs_parents[v], perm);
  for (int v = 0; v < m.n; ++v) out.push_back((char)pm[v]);
  std::array<unsigned char, 24> fs{};
  int nf = (int)m.facets.size();
  for (int i = 0; i < nf; ++i) fs[i] = (unsigned char)permute_mask(m.facets[i], perm);
  std::sort(fs.begin(), fs.begin() + nf);
  out.push_back((char)nf);
  for (int i = 0; i < nf; ++i) out.push_back((char)fs[i]);
}

}  // namespace

CanonicalCode canonical_form(const MDag& m) {
  std::array<int, 6> perm;
  std::iota(perm.begin(), perm.begin() + m.n, 0);
  std::string best, cur;
  do {
    encode_labelled(m, perm.data(), cur);
    if (best.empty() || cur < best) best = cur;
  } while (std::next_permutation(perm.begin(), perm.begin() + m.n));
  return CanonicalCode{best};
}

std::vector<std::vector<int>> automorphisms(const MDag& m) {
  std::array<int, 6> perm;
  std::iota(perm.begin(), perm.begin() + m.n, 0);
  std::string self, cur;
  std::array<int, 6> id;
  std::iota(id.begin(), id.begin() + m.n, 0);
  encode_labelled(m, id.data(), self);
  std::vector<std::vector<int>> out;
  do {
    encode_labelled(m, perm.data(), cur);
    if (cur == self) out.emplace_back(perm.begin(), perm.begin() + m.n);
  } while (std::next_permutation(perm.begin(), perm.begin() + m.n));
  return out;
}

std::string CanonicalCode::text() const {
  if (bytes.empty()) return "empty";
  int n = bytes[0];
  std::string s = "n" + std::to_string(n) + ":e";
  bool first = true;
  for (int v = 0; v < n; ++v) {
    NodeMask pmask = (unsigned char)bytes[1 + v];
    for_each_bit(pmask, [&](int u) {
      if (!first) s += ',';
      first = false;
      s += std::to_string(u);
      s += '>';
      s += std::to_string(v);
    });
  }
  s += ":f";
  int nf = bytes[1 + n];
  for (int i = 0; i < nf; ++i) {
    if (i) s += ',';
    NodeMask f = (unsigned char)bytes[2 + n + i];
    for_each_bit(f, [&](int v) { s += std::to_string(v); });
  }
  return s;
}

}  // namespace mdag
