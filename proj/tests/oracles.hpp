#pragma once

// Brute-force reference implementations, kept independent of the library's
// algorithmic paths: separation by path enumeration, support compatibility
// by plain enumeration of deterministic models with explicit private noise.

#include <cstdint>
#include <optional>
#include <vector>

#include "mdag/graph.hpp"
#include "mdag/separation.hpp"
#include "mdag/supports.hpp"

namespace oracle {

using mdag::bit;
using mdag::has_bit;
using mdag::NodeMask;

// every undirected simple path between the sets must carry a blocked node
inline bool dsep_by_paths(const mdag::SepView& v, NodeMask x_set, NodeMask y_set, NodeMask z) {
  std::vector<int> path;
  bool found_active = false;

  auto blocked_at = [&](int prev, int m, int next) {
    bool in_prev = has_bit(v.parents[m], prev);   // prev -> m
    bool in_next = has_bit(v.parents[m], next);   // next -> m
    bool collider = in_prev && in_next;
    if (collider) return (v.desc[m] & z) == 0;
    return has_bit(z, m);
  };

  std::function<void(int)> extend = [&](int cur) {
    if (found_active) return;
    if (has_bit(y_set, cur) && path.size() >= 2) {
      bool active = true;
      for (std::size_t i = 1; i + 1 < path.size(); ++i)
        if (blocked_at(path[i - 1], path[i], path[i + 1])) active = false;
      if (active) found_active = true;
      return;  // simple paths ending at Y
    }
    NodeMask nbrs = v.parents[cur] | v.children[cur];
    for (int nxt = 0; nxt < v.n_total; ++nxt) {
      if (!has_bit(nbrs, nxt)) continue;
      bool visited = false;
      for (int p : path)
        if (p == nxt) visited = true;
      if (visited) continue;
      if (has_bit(x_set, nxt)) continue;  // re-entering X starts a shorter path
      path.push_back(nxt);
      extend(nxt);
      path.pop_back();
    }
  };

  for (int x = 0; x < v.n_total && !found_active; ++x) {
    if (!has_bit(x_set, x)) continue;
    path.assign(1, x);
    extend(x);
  }
  return !found_active;
}

// Deterministic models spelled out in full: every facet plus one private
// noise per node, all with cardinality `card`; nested enumeration of the
// whole function tables, pruned only when an already-determined world
// escapes the support. Returns nullopt when max_nodes is hit.
inline std::optional<bool> support_compatible_by_models(const mdag::Support& s, const mdag::MDag& g,
                                                        int card, std::uint64_t max_nodes) {
  int n = g.n, k = (int)g.facets.size();
  int n_lat = k + n;  // facets then privates
  std::uint64_t n_worlds = 1;
  for (int i = 0; i < n_lat; ++i) n_worlds *= (std::uint64_t)card;
  if (n_worlds > 4096) return std::nullopt;

  // topological order
  std::vector<int> order;
  {
    std::vector<int> indeg(n);
    for (int v = 0; v < n; ++v) indeg[v] = mdag::popcount(g.obs_parents[v]);
    std::vector<int> q;
    for (int v = 0; v < n; ++v)
      if (indeg[v] == 0) q.push_back(v);
    while (!q.empty()) {
      int v = q.back();
      q.pop_back();
      order.push_back(v);
      for (int w = 0; w < n; ++w)
        if (has_bit(g.obs_parents[w], v) && --indeg[w] == 0) q.push_back(w);
    }
  }

  // flat tables: entry per (node, obs-parent values, latent-parent values)
  struct NodeT {
    int id;
    std::vector<int> obs_pa;
    std::vector<int> lat_pa;  // facet ids, then private (k + id)
    std::uint64_t entries;
    std::uint64_t base;
  };
  std::vector<NodeT> nodes;
  std::uint64_t total_entries = 0;
  for (int v : order) {
    NodeT nd;
    nd.id = v;
    mdag::for_each_bit(g.obs_parents[v], [&](int u) { nd.obs_pa.push_back(u); });
    for (int f = 0; f < k; ++f)
      if (has_bit(g.facets[f], v)) nd.lat_pa.push_back(f);
    nd.lat_pa.push_back(k + v);
    std::uint64_t cnt = 1;
    for (int u : nd.obs_pa) cnt *= (std::uint64_t)s.cards[u];
    for (std::size_t i = 0; i < nd.lat_pa.size(); ++i) cnt *= (std::uint64_t)card;
    nd.entries = cnt;
    nd.base = total_entries;
    total_entries += cnt;
    nodes.push_back(std::move(nd));
  }
  if (total_entries > 40) return std::nullopt;

  std::vector<int> table(total_entries, -1);
  std::uint64_t explored = 0;
  bool out_of_budget = false;

  std::vector<int> values(n);
  // evaluates one world; 1 = event in S, 0 = event outside S, -1 = undecided
  auto eval_world = [&](std::uint64_t w) -> int {
    for (const NodeT& nd : nodes) {
      std::uint64_t idx = 0;
      for (int u : nd.obs_pa) idx = idx * (std::uint64_t)s.cards[u] + (std::uint64_t)values[u];
      for (int l : nd.lat_pa) {
        std::uint64_t digit = w;
        for (int i = 0; i < l; ++i) digit /= (std::uint64_t)card;
        idx = idx * (std::uint64_t)card + digit % (std::uint64_t)card;
      }
      int val = table[nd.base + idx];
      if (val < 0) return -1;
      values[nd.id] = val;
    }
    std::uint32_t code = 0, stride = 1;
    for (int v = 0; v < n; ++v) {
      code += (std::uint32_t)values[v] * stride;
      stride *= (std::uint32_t)s.cards[v];
    }
    return std::binary_search(s.events.begin(), s.events.end(), code) ? 1 : 0;
  };

  std::function<bool(std::uint64_t)> dfs = [&](std::uint64_t pos) -> bool {
    if (++explored > max_nodes) {
      out_of_budget = true;
      return false;
    }
    if (pos == total_entries) {
      std::uint32_t covered = 0;
      for (std::uint64_t w = 0; w < n_worlds; ++w) {
        if (eval_world(w) != 1) return false;
        std::uint32_t code = 0, stride = 1;
        for (int v = 0; v < n; ++v) {
          code += (std::uint32_t)values[v] * stride;
          stride *= (std::uint32_t)s.cards[v];
        }
        for (std::size_t i = 0; i < s.events.size(); ++i)
          if (s.events[i] == code) covered |= 1u << i;
      }
      return covered == (s.events.size() >= 32 ? 0xffffffffu : ((1u << s.events.size()) - 1));
    }
    int node_card = 0;
    for (const NodeT& nd : nodes)
      if (pos >= nd.base && pos < nd.base + nd.entries) node_card = s.cards[nd.id];
    for (int val = 0; val < node_card; ++val) {
      table[pos] = val;
      bool escape = false;
      for (std::uint64_t w = 0; w < n_worlds && !escape; ++w)
        if (eval_world(w) == 0) escape = true;
      if (!escape && dfs(pos + 1)) return true;
      if (out_of_budget) break;
    }
    table[pos] = -1;
    return false;
  };

  bool ok = dfs(0);
  if (out_of_budget) return std::nullopt;
  return ok;
}

}  // namespace oracle
