#include "mdag/separation.hpp"

#include <algorithm>
#include <tuple>

namespace mdag {

std::size_t pair_index(int x, int y) {
  // row-major over x < y with n unknown: offset by triangular numbers
  return (std::size_t)y * (y - 1) / 2 + x;
}

int pair_count(int n) { return n * (n - 1) / 2; }

bool Fingerprint::empty() const {
  for (auto b : pair_bits)
    if (b) return false;
  return true;
}

std::string Fingerprint::serialize() const {
  std::string s;
  s.push_back((char)n);
  s.push_back((char)kind);
  for (auto b : pair_bits) {
    s.push_back((char)(b & 0xff));
    s.push_back((char)((b >> 8) & 0xff));
    s.push_back((char)((b >> 16) & 0xff));
    s.push_back((char)((b >> 24) & 0xff));
  }
  return s;
}

namespace {

// Bit layout per pair: d-sep uses index = compressed Z subset of the other
// n-2 nodes; e-sep uses base-3 digit per other node (0 absent, 1 in Z, 2 in W).
NodeMask expand_subset(int compressed, NodeMask universe) {
  NodeMask out = 0;
  int i = 0;
  for_each_bit(universe, [&](int v) {
    if ((compressed >> i) & 1) out |= bit(v);
    ++i;
  });
  return out;
}

int compress_subset(NodeMask sub, NodeMask universe) {
  int out = 0, i = 0;
  for_each_bit(universe, [&](int v) {
    if (has_bit(sub, v)) out |= 1 << i;
    ++i;
  });
  return out;
}

int pow3(int k) {
  int r = 1;
  while (k--) r *= 3;
  return r;
}

}  // namespace

std::vector<std::tuple<int, int, NodeMask>> Fingerprint::relations() const {
  std::vector<std::tuple<int, int, NodeMask>> out;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < y; ++x) {
      NodeMask others = full_mask(n) & ~bit(x) & ~bit(y);
      std::uint32_t bits = pair_bits[pair_index(x, y)];
      for (int c = 0; c < (1 << (n - 2)); ++c)
        if ((bits >> c) & 1) out.emplace_back(x, y, expand_subset(c, others));
    }
  return out;
}

std::string Fingerprint::to_json() const {
  std::string s = "[";
  bool first = true;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < y; ++x) {
      NodeMask others = full_mask(n) & ~bit(x) & ~bit(y);
      std::uint32_t bits = pair_bits[pair_index(x, y)];
      if (kind == FingerprintKind::Dsep) {
        for (int c = 0; c < (1 << (n - 2)); ++c)
          if ((bits >> c) & 1) {
            if (!first) s += ',';
            first = false;
            s += "[" + std::to_string(x) + "," + std::to_string(y) + "," +
                 std::to_string(expand_subset(c, others)) + "]";
          }
      } else {
        int states = pow3(n - 2);
        for (int c = 0; c < states; ++c)
          if ((bits >> c) & 1) {
            NodeMask zm = 0, wm = 0;
            int t = c;
            for_each_bit(others, [&](int v) {
              int d = t % 3;
              t /= 3;
              if (d == 1) zm |= bit(v);
              if (d == 2) wm |= bit(v);
            });
            if (!first) s += ',';
            first = false;
            s += "[" + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(zm) +
                 "," + std::to_string(wm) + "]";
          }
      }
    }
  s += "]";
  return s;
}

SepView sep_view(const MDag& m) {
  SepView v;
  v.n_obs = m.n;
  v.n_total = m.n + (int)m.facets.size();
  v.parents.assign(v.n_total, 0);
  v.children.assign(v.n_total, 0);
  for (int u = 0; u < m.n; ++u) v.parents[u] = m.obs_parents[u];
  for (int i = 0; i < (int)m.facets.size(); ++i) {
    int l = m.n + i;
    v.children[l] = m.facets[i];
    for_each_bit(m.facets[i], [&](int c) { v.parents[c] |= bit(l); });
  }
  for (int u = 0; u < v.n_total; ++u)
    for_each_bit(v.parents[u], [&](int p) { v.children[p] |= bit(u); });
  // descendant closure over the combined node set
  v.desc.assign(v.n_total, 0);
  for (int pass = 0; pass < v.n_total; ++pass) {
    bool changed = false;
    for (int u = v.n_total - 1; u >= 0; --u) {
      NodeMask d = bit(u);
      for_each_bit(v.children[u], [&](int c) { d |= v.desc[c]; });
      if (d != v.desc[u]) {
        v.desc[u] = d;
        changed = true;
      }
    }
    if (!changed) break;
  }
  v.anc.assign(v.n_total, 0);
  for (int u = 0; u < v.n_total; ++u)
    for_each_bit(v.desc[u], [&](int d) { v.anc[d] |= bit(u); });
  return v;
}

SepView sep_view(const Dag& g) {
  SepView v;
  v.n_obs = g.n_obs;
  v.n_total = g.total();
  v.parents = g.parents;
  v.children = g.children;
  v.desc = g.desc;
  v.anc = g.anc;
  return v;
}

bool d_separated(const SepView& v, NodeMask x, NodeMask y, NodeMask z) {
  if ((x & y) || (x & z) || (y & z)) throw DisjointnessError("query sets must be disjoint");
  if (!x || !y) throw DisjointnessError("query sets X and Y must be nonempty");
  // Ball-passing reachability. State per node: entered moving up (from a
  // child) or down (from a parent). A collider forwards upward only if it
  // or one of its descendants is conditioned on.
  NodeMask up = 0, down = 0;
  NodeMask frontier_up = x, frontier_down = 0;
  while (frontier_up || frontier_down) {
    NodeMask next_up = 0, next_down = 0;
    for_each_bit(frontier_up & ~up, [&](int u) {
      up |= bit(u);
      if (!has_bit(z, u)) {
        next_up |= v.parents[u];
        next_down |= v.children[u];
      }
    });
    for_each_bit(frontier_down & ~down, [&](int u) {
      down |= bit(u);
      if (!has_bit(z, u)) next_down |= v.children[u];
      if (v.desc[u] & z) next_up |= v.parents[u];
    });
    frontier_up = next_up & ~up;
    frontier_down = next_down & ~down;
  }
  return ((up | down) & y) == 0;
}

bool d_separated(const MDag& m, const SepQuery& q) {
  if (q.w) throw DisjointnessError("d-separation takes an empty deletion set");
  return d_separated(sep_view(m), q.x, q.y, q.z);
}

bool d_separated(const Dag& g, const SepQuery& q) {
  if (q.w) throw DisjointnessError("d-separation takes an empty deletion set");
  return d_separated(sep_view(g), q.x, q.y, q.z);
}

bool e_separated(const MDag& m, const SepQuery& q) {
  NodeMask obs = full_mask(m.n);
  if ((q.x | q.y | q.z | q.w) & ~obs) throw DisjointnessError("e-separation sets must be observed");
  if ((q.x & q.y) || (q.x & q.z) || (q.y & q.z) || (q.w & (q.x | q.y | q.z)))
    throw DisjointnessError("query sets must be disjoint");
  MDag del = delete_observed(m, q.w);
  // re-index the surviving nodes
  auto shrink = [&](NodeMask mask) {
    NodeMask out = 0;
    int idx = 0;
    for (int v = 0; v < m.n; ++v) {
      if (has_bit(q.w, v)) continue;
      if (has_bit(mask, v)) out |= bit(idx);
      ++idx;
    }
    return out;
  };
  return d_separated(sep_view(del), shrink(q.x), shrink(q.y), shrink(q.z));
}

namespace {

template <typename ViewLike>
Fingerprint dsep_fingerprint_impl(int n, const ViewLike& view) {
  Fingerprint fp;
  fp.n = n;
  fp.kind = FingerprintKind::Dsep;
  fp.pair_bits.assign(pair_count(n), 0);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < y; ++x) {
      NodeMask others = full_mask(n) & ~bit(x) & ~bit(y);
      std::uint32_t bits = 0;
      for (int c = 0; c < (1 << (n - 2)); ++c) {
        NodeMask z = expand_subset(c, others);
        if (d_separated(view, bit(x), bit(y), z)) bits |= 1u << c;
      }
      fp.pair_bits[pair_index(x, y)] = bits;
    }
  return fp;
}

}  // namespace

Fingerprint dsep_fingerprint(const MDag& m) { return dsep_fingerprint_impl(m.n, sep_view(m)); }
Fingerprint dsep_fingerprint(const Dag& g) {
  return dsep_fingerprint_impl(g.n_obs, sep_view(g));
}

namespace {

template <typename GraphT>
Fingerprint esep_fingerprint_impl(const GraphT& g, int n) {
  Fingerprint fp;
  fp.n = n;
  fp.kind = FingerprintKind::Esep;
  fp.pair_bits.assign(pair_count(n), 0);
  int states = pow3(n - 2);
  // Deleting W and then asking pair separations: group queries by W so each
  // deleted graph is built once.
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < y; ++x) {
      NodeMask others = full_mask(n) & ~bit(x) & ~bit(y);
      std::uint32_t bits = 0;
      for_each_subset(others, [&](NodeMask w) {
        GraphT del = delete_observed(g, w);
        auto view = sep_view(del);
        auto shrink = [&](NodeMask mask) {
          NodeMask out = 0;
          int idx = 0;
          for (int v = 0; v < n; ++v) {
            if (has_bit(w, v)) continue;
            if (has_bit(mask, v)) out |= bit(idx);
            ++idx;
          }
          return out;
        };
        NodeMask zcand = others & ~w;
        for_each_subset(zcand, [&](NodeMask z) {
          if (!d_separated(view, shrink(bit(x)), shrink(bit(y)), shrink(z))) return;
          int code = 0;
          int digit = 1;
          for_each_bit(others, [&](int v) {
            if (has_bit(z, v)) code += digit;
            if (has_bit(w, v)) code += 2 * digit;
            digit *= 3;
          });
          bits |= 1u << code;
        });
      });
      (void)states;
      fp.pair_bits[pair_index(x, y)] = bits;
    }
  return fp;
}

}  // namespace

Fingerprint esep_fingerprint(const MDag& m) { return esep_fingerprint_impl(m, m.n); }
Fingerprint esep_fingerprint(const Dag& g) { return esep_fingerprint_impl(g, g.n_obs); }

Fingerprint permuted(const Fingerprint& fp, const int* perm) {
  Fingerprint out;
  out.n = fp.n;
  out.kind = fp.kind;
  out.pair_bits.assign(fp.pair_bits.size(), 0);
  for (int y = 0; y < fp.n; ++y)
    for (int x = 0; x < y; ++x) {
      NodeMask others = full_mask(fp.n) & ~bit(x) & ~bit(y);
      std::uint32_t bits = fp.pair_bits[pair_index(x, y)];
      if (!bits) continue;
      int px = perm[x], py = perm[y];
      int qx = std::min(px, py), qy = std::max(px, py);
      NodeMask pothers = full_mask(fp.n) & ~bit(qx) & ~bit(qy);
      if (fp.kind == FingerprintKind::Dsep) {
        for (int c = 0; c < (1 << (fp.n - 2)); ++c)
          if ((bits >> c) & 1) {
            NodeMask z = permute_mask(expand_subset(c, others), perm);
            out.pair_bits[pair_index(qx, qy)] |= 1u << compress_subset(z, pothers);
          }
      } else {
        int states = pow3(fp.n - 2);
        for (int c = 0; c < states; ++c)
          if ((bits >> c) & 1) {
            NodeMask zm = 0, wm = 0;
            int t = c;
            for_each_bit(others, [&](int v) {
              int d = t % 3;
              t /= 3;
              if (d == 1) zm |= bit(perm[v]);
              if (d == 2) wm |= bit(perm[v]);
            });
            int code = 0, digit = 1;
            for_each_bit(pothers, [&](int v) {
              if (has_bit(zm, v)) code += digit;
              if (has_bit(wm, v)) code += 2 * digit;
              digit *= 3;
            });
            out.pair_bits[pair_index(qx, qy)] |= 1u << code;
          }
      }
    }
  return out;
}

namespace {

template <typename ViewLike>
bool pair_d_separable_impl(const ViewLike& v, int a, int b) {
  NodeMask obs = full_mask(v.n_obs);
  NodeMask z = ((v.anc[a] | v.anc[b]) & obs) & ~bit(a) & ~bit(b);
  return d_separated(v, bit(a), bit(b), z);
}

}  // namespace

bool pair_d_separable(const MDag& m, int a, int b) {
  if (a < 0 || b < 0 || a >= m.n || b >= m.n || a == b) throw IndexError("bad node pair");
  return pair_d_separable_impl(sep_view(m), a, b);
}

bool pair_d_separable(const Dag& g, int a, int b) {
  if (a < 0 || b < 0 || a >= g.n_obs || b >= g.n_obs || a == b) throw IndexError("bad node pair");
  return pair_d_separable_impl(sep_view(g), a, b);
}

MaximalityResult is_maximal(const MDag& m) {
  auto v = sep_view(m);
  for (int b = 0; b < m.n; ++b)
    for (int a = 0; a < b; ++a) {
      if (has_bit(m.adj[a], b)) continue;
      if (!pair_d_separable_impl(v, a, b)) return {false, a, b};
    }
  return {};
}

MaximalityResult is_maximal(const Dag& g) {
  // adjacency in a raw DAG: adjacency of its reduction
  MDag m = to_mdag(g);
  return is_maximal(m);
}

bool setwise_adjacent(const MDag& m, NodeMask s) {
  if (popcount(s) < 2) throw SizeError("setwise adjacency needs at least two nodes");
  if (s & ~full_mask(m.n)) throw IndexError("set member out of range");
  MDag sub = delete_observed(m, full_mask(m.n) & ~s);
  auto v = sep_view(sub);
  NodeMask target = full_mask(sub.n);
  for (int u = 0; u < v.n_total; ++u)
    if ((v.desc[u] & target) == target) return true;
  return false;
}

bool setwise_d_unrestricted(const MDag& m, NodeMask s) {
  if (popcount(s) < 2) throw SizeError("setwise d-unrestriction needs at least two nodes");
  if (s & ~full_mask(m.n)) throw IndexError("set member out of range");
  auto v = sep_view(m);
  NodeMask outside = full_mask(m.n) & ~s;
  bool separated_pair = false;
  for_each_bit(s, [&](int b) {
    for_each_bit(s & (bit(b) - 1), [&](int a) {
      if (separated_pair) return;
      for_each_subset(outside, [&](NodeMask z) {
        if (separated_pair) return;
        if (d_separated(v, bit(a), bit(b), z)) separated_pair = true;
      });
    });
  });
  return !separated_pair;
}

SetwiseResult is_setwise_maximal(const MDag& m) {
  NodeMask all = full_mask(m.n);
  for (NodeMask s = 3; s <= all; ++s) {
    if (popcount(s) < 2) continue;
    if (setwise_d_unrestricted(m, s) && !setwise_adjacent(m, s)) return {false, s};
  }
  return {};
}

}  // namespace mdag
