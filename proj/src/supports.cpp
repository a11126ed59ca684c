#include "mdag/supports.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

namespace mdag {

std::uint32_t Support::space() const {
  std::uint32_t p = 1;
  for (int c : cards) p *= (std::uint32_t)c;
  return p;
}

std::uint32_t Support::encode(const std::vector<int>& values) const {
  std::uint32_t code = 0, stride = 1;
  for (int i = 0; i < n(); ++i) {
    code += (std::uint32_t)values[i] * stride;
    stride *= (std::uint32_t)cards[i];
  }
  return code;
}

std::vector<int> Support::decode(std::uint32_t code) const {
  std::vector<int> v(n());
  for (int i = 0; i < n(); ++i) {
    v[i] = (int)(code % (std::uint32_t)cards[i]);
    code /= (std::uint32_t)cards[i];
  }
  return v;
}

int Support::value_of(std::uint32_t code, int node) const {
  for (int i = 0; i < node; ++i) code /= (std::uint32_t)cards[i];
  return (int)(code % (std::uint32_t)cards[node]);
}

Support make_support(std::vector<int> cards, const std::vector<std::vector<int>>& events) {
  Support s;
  s.cards = std::move(cards);
  for (int c : s.cards)
    if (c < 1) throw ArityError("cardinalities must be positive");
  if (events.empty()) throw ArityError("a support needs at least one event");
  for (const auto& e : events) {
    if ((int)e.size() != s.n()) throw ArityError("event length does not match cardinalities");
    for (int i = 0; i < s.n(); ++i)
      if (e[i] < 0 || e[i] >= s.cards[i]) throw ArityError("event value out of range");
    s.events.push_back(s.encode(e));
  }
  std::sort(s.events.begin(), s.events.end());
  s.events.erase(std::unique(s.events.begin(), s.events.end()), s.events.end());
  return s;
}

namespace {
long long gcd_ll(long long a, long long b) {
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}
}  // namespace

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw ArityError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long g = gcd_ll(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator*(const Rational& o) const { return {num * o.num, den * o.den}; }
Rational Rational::operator+(const Rational& o) const {
  return {num * o.den + o.num * den, den * o.den};
}

// ---------------------------------------------------------------------------
// set-valued d-separation relations and trivial incompatibility
// ---------------------------------------------------------------------------

RelationList set_dsep_relations(const MDag& m) {
  RelationList out;
  out.n = m.n;
  Fingerprint fp = dsep_fingerprint(m);
  // (A perp B | C) over node sets decomposes into singleton pairs at fixed C,
  // so the fingerprint already determines every set-valued relation.
  auto holds_pair = [&](int x, int y, NodeMask z) {
    if (x > y) std::swap(x, y);
    NodeMask others = full_mask(m.n) & ~bit(x) & ~bit(y);
    int c = 0, i = 0;
    for_each_bit(others, [&](int v) {
      if (has_bit(z, v)) c |= 1 << i;
      ++i;
    });
    return ((fp.pair_bits[pair_index(x, y)] >> c) & 1u) != 0;
  };
  int total = 1;
  for (int i = 0; i < m.n; ++i) total *= 4;
  for (int t = 0; t < total; ++t) {
    NodeMask a = 0, b = 0, c = 0;
    int x = t;
    for (int i = 0; i < m.n; ++i) {
      switch (x & 3) {
        case 1: a |= bit(i); break;
        case 2: b |= bit(i); break;
        case 3: c |= bit(i); break;
      }
      x >>= 2;
    }
    if (!a || !b || a > b) continue;
    bool holds = true;
    for_each_bit(a, [&](int i) {
      for_each_bit(b, [&](int j) {
        if (holds && !holds_pair(i, j, c)) holds = false;
      });
    });
    if (holds) out.relations.push_back({a, b, c});
  }
  return out;
}

namespace {

std::uint32_t project(const Support& s, std::uint32_t code, NodeMask set) {
  // packs the values over `set` (ascending node order) into one integer
  std::uint32_t out = 0, stride = 1;
  for_each_bit(set, [&](int v) {
    out += (std::uint32_t)s.value_of(code, v) * stride;
    stride *= (std::uint32_t)s.cards[v];
  });
  return out;
}

std::vector<int> unpack_values(const Support& s, std::uint32_t packed, NodeMask set) {
  std::vector<int> vals;
  for_each_bit(set, [&](int v) {
    vals.push_back((int)(packed % (std::uint32_t)s.cards[v]));
    packed /= (std::uint32_t)s.cards[v];
  });
  return vals;
}

}  // namespace

std::optional<ConflictWitness> trivially_incompatible(const Support& s, const MDag& g,
                                                      const RelationList& rels) {
  if ((int)s.cards.size() != g.n) throw ArityError("support arity does not match graph");
  for (const auto& r : rels.relations) {
    NodeMask a = r[0], b = r[1], c = r[2];
    struct Bucket {
      std::vector<std::uint32_t> avals, bvals;
      std::vector<std::pair<std::uint32_t, std::uint32_t>> abvals;
    };
    std::map<std::uint32_t, Bucket> buckets;
    for (std::uint32_t e : s.events) {
      auto& bk = buckets[project(s, e, c)];
      std::uint32_t av = project(s, e, a), bv = project(s, e, b);
      bk.avals.push_back(av);
      bk.bvals.push_back(bv);
      bk.abvals.emplace_back(av, bv);
    }
    for (auto& [cv, bk] : buckets) {
      std::sort(bk.avals.begin(), bk.avals.end());
      bk.avals.erase(std::unique(bk.avals.begin(), bk.avals.end()), bk.avals.end());
      std::sort(bk.bvals.begin(), bk.bvals.end());
      bk.bvals.erase(std::unique(bk.bvals.begin(), bk.bvals.end()), bk.bvals.end());
      std::sort(bk.abvals.begin(), bk.abvals.end());
      for (std::uint32_t av : bk.avals)
        for (std::uint32_t bv : bk.bvals) {
          if (!std::binary_search(bk.abvals.begin(), bk.abvals.end(), std::make_pair(av, bv))) {
            ConflictWitness w;
            w.a_set = a;
            w.b_set = b;
            w.c_set = c;
            w.a_vals = unpack_values(s, av, a);
            w.b_vals = unpack_values(s, bv, b);
            w.c_vals = unpack_values(s, cv, c);
            return w;
          }
        }
    }
  }
  return std::nullopt;
}

std::optional<ConflictWitness> trivially_incompatible(const Support& s, const MDag& g) {
  return trivially_incompatible(s, g, set_dsep_relations(g));
}

std::optional<ConflictWitness> trivially_incompatible(const Support& s, const Dag& g) {
  return trivially_incompatible(s, to_mdag(g));
}

// ---------------------------------------------------------------------------
// deterministic-model search
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kQuickPassBudget = 1u << 14;

// One engine serves two modes. With the event-indexed cover convention
// (cardinality == |S|, latent value i dedicated to event i) the diagonal
// cells are forced and cover holds by construction: any model extends the
// forced cells iff it is a valid model at that bound. In the general mode
// cells range over small value subsets (private noise folded into the
// response) and cover is checked once every world passes.
struct Engine {
  const Support& s;
  const MDag& g;
  int n, m, c, k;
  bool eventwise;
  std::uint32_t n_worlds = 1;

  struct Node {
    int id = 0;
    std::vector<int> obs_pa;
    std::vector<int> obs_stride;
    std::vector<int> fac_pa;  // facet indices, ascending
    std::uint32_t obs_ctx = 1, lat_ctx = 1;
    std::uint32_t base = 0;
  };
  std::vector<Node> nodes;                // topological order
  std::vector<std::uint16_t> table;       // flat cells; 0 = unset
  std::vector<int> cell_card;             // output cardinality per cell
  std::vector<std::uint32_t> evmask;      // [node-offset + value] -> event mask
  std::vector<int> evm_off;
  std::uint32_t all_events = 0;
  std::array<std::vector<std::uint16_t>, 5> domains;  // general mode, by card

  std::vector<std::vector<std::uint32_t>> deps;  // cell -> worlds that read it
  std::vector<std::uint32_t> stamp;              // last run id per cell
  std::uint32_t run_id = 0;
  std::vector<std::uint8_t> in_queue;
  std::vector<std::uint32_t> queue;
  struct Decision {
    std::uint32_t cell;
    int pos;
  };
  std::vector<Decision> trail;
  std::uint64_t explored = 0;
  std::uint64_t budget = 0;
  bool reverse_values = false;

  Engine(const Support& sup, const MDag& graph, int card, bool diag)
      : s(sup), g(graph), m((int)sup.events.size()), c(card), eventwise(diag) {
    n = g.n;
    k = (int)g.facets.size();
    for (int i = 0; i < k; ++i) n_worlds *= (std::uint32_t)c;

    std::vector<int> order;
    {
      std::vector<int> indeg(n);
      for (int v = 0; v < n; ++v) indeg[v] = popcount(g.obs_parents[v]);
      std::vector<int> q;
      for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) q.push_back(v);
      while (!q.empty()) {
        std::sort(q.begin(), q.end(), std::greater<int>());
        int v = q.back();
        q.pop_back();
        order.push_back(v);
        for (int w = 0; w < n; ++w)
          if (has_bit(g.obs_parents[w], v) && --indeg[w] == 0) q.push_back(w);
      }
    }

    std::uint32_t base = 0;
    for (int v : order) {
      Node nd;
      nd.id = v;
      int stride = 1;
      for_each_bit(g.obs_parents[v], [&](int u) {
        nd.obs_pa.push_back(u);
        nd.obs_stride.push_back(stride);
        stride *= s.cards[u];
      });
      nd.obs_ctx = (std::uint32_t)stride;
      for (int f = 0; f < k; ++f)
        if (has_bit(g.facets[f], v)) nd.fac_pa.push_back(f);
      for (std::size_t t = 0; t < nd.fac_pa.size(); ++t) nd.lat_ctx *= (std::uint32_t)c;
      nd.base = base;
      base += nd.obs_ctx * nd.lat_ctx;
      nodes.push_back(std::move(nd));
    }
    table.assign(base, 0);
    cell_card.assign(base, 0);
    for (const auto& nd : nodes)
      for (std::uint32_t i = 0; i < nd.obs_ctx * nd.lat_ctx; ++i)
        cell_card[nd.base + i] = s.cards[nd.id];

    evm_off.assign(n + 1, 0);
    for (int v = 0; v < n; ++v) evm_off[v + 1] = evm_off[v] + s.cards[v];
    evmask.assign(evm_off[n], 0);
    for (int i = 0; i < m; ++i) {
      for (int v = 0; v < n; ++v) evmask[evm_off[v] + s.value_of(s.events[i], v)] |= 1u << i;
      all_events |= 1u << i;
    }

    for (int cv = 1; cv <= 4; ++cv) {
      int limit = std::min(cv, c);
      for (int pc = 1; pc <= limit; ++pc)
        for (std::uint16_t msk = 1; msk < (1u << cv); ++msk)
          if (std::popcount(msk) == pc) domains[cv].push_back(msk);
    }

    if (eventwise) {
      for (int i = 0; i < m; ++i) {
        for (const auto& nd : nodes) {
          std::uint32_t octx = 0;
          for (std::size_t t = 0; t < nd.obs_pa.size(); ++t)
            octx += (std::uint32_t)s.value_of(s.events[i], nd.obs_pa[t]) *
                    (std::uint32_t)nd.obs_stride[t];
          std::uint32_t lctx = 0;
          for (std::size_t t = 0; t < nd.fac_pa.size(); ++t)
            lctx = lctx * (std::uint32_t)c + (std::uint32_t)i;
          std::uint32_t cell = nd.base + octx * nd.lat_ctx + lctx;
          table[cell] |= (std::uint16_t)(1u << s.value_of(s.events[i], nd.id));
        }
      }
    }

    deps.assign(table.size(), {});
    stamp.assign(table.size(), 0);
    in_queue.assign(n_worlds, 1);
    queue.resize(n_worlds);
    for (std::uint32_t w = 0; w < n_worlds; ++w) queue[w] = n_worlds - 1 - w;
  }

  enum class RunStatus { Pass, Fail, Blocked };
  struct RunOut {
    RunStatus st = RunStatus::Pass;
    std::uint32_t blocked_cell = 0;
    std::uint32_t generated = 0;
  };

  std::uint32_t cell_of(const Node& nd, const int* values, std::uint32_t w) const {
    std::uint32_t octx = 0;
    for (std::size_t t = 0; t < nd.obs_pa.size(); ++t)
      octx += (std::uint32_t)values[nd.obs_pa[t]] * (std::uint32_t)nd.obs_stride[t];
    std::uint32_t lctx = 0;
    for (std::size_t t = 0; t < nd.fac_pa.size(); ++t) {
      std::uint32_t digit = w;
      for (int f = 0; f < nd.fac_pa[t]; ++f) digit /= (std::uint32_t)c;
      lctx = lctx * (std::uint32_t)c + digit % (std::uint32_t)c;
    }
    return nd.base + octx * nd.lat_ctx + lctx;
  }

  RunOut run_world(std::uint32_t w, bool collect) {
    ++run_id;
    RunOut out;
    bool blocked = false;
    std::uint32_t blocked_cell = 0;
    bool fail = false;
    int values[6];
    std::uint32_t generated = 0;

    auto touch = [&](std::uint32_t cell) {
      if (stamp[cell] != run_id) {
        stamp[cell] = run_id;
        deps[cell].push_back(w);
      }
    };

    std::function<void(int, std::uint32_t)> rec = [&](int p, std::uint32_t cands) {
      if (fail) return;
      if (p == n) {
        generated |= cands;
        return;
      }
      const Node& nd = nodes[p];
      std::uint32_t cell = cell_of(nd, values, w);
      touch(cell);
      std::uint16_t mask = table[cell];
      if (!mask) {
        if (!blocked) {
          blocked = true;
          blocked_cell = cell;
        }
        return;
      }
      while (mask && !fail) {
        int v = std::countr_zero((unsigned)mask);
        mask &= (std::uint16_t)(mask - 1);
        std::uint32_t nc = cands & evmask[evm_off[nd.id] + v];
        if (!nc) {
          fail = true;
          return;
        }
        values[nd.id] = v;
        rec(p + 1, nc);
      }
    };
    rec(0, all_events);

    if (fail) {
      out.st = RunStatus::Fail;
    } else if (blocked) {
      out.st = RunStatus::Blocked;
      out.blocked_cell = blocked_cell;
    } else {
      out.st = RunStatus::Pass;
      out.generated = collect ? generated : 0;
    }
    return out;
  }

  void mark_dirty_for(std::uint32_t cell) {
    auto& d = deps[cell];
    for (std::uint32_t w : d)
      if (!in_queue[w]) {
        in_queue[w] = 1;
        queue.push_back(w);
      }
    d.clear();
  }

  int domain_size(std::uint32_t cell) const {
    return eventwise ? cell_card[cell] : (int)domains[cell_card[cell]].size();
  }

  std::uint16_t choice_mask(std::uint32_t cell, int pos) const {
    int size = domain_size(cell);
    int p = reverse_values ? size - 1 - pos : pos;
    if (eventwise) return (std::uint16_t)(1u << p);
    return domains[cell_card[cell]][p];
  }

  void assign(std::uint32_t cell, int pos) {
    table[cell] = choice_mask(cell, pos);
    mark_dirty_for(cell);
    ++explored;
    if (budget && explored > budget) throw TimeoutError(explored);
  }

  void unassign(std::uint32_t cell) {
    table[cell] = 0;
    mark_dirty_for(cell);
  }

  bool backtrack() {
    while (!trail.empty()) {
      Decision d = trail.back();
      trail.pop_back();
      unassign(d.cell);
      if (d.pos + 1 < domain_size(d.cell)) {
        assign(d.cell, d.pos + 1);
        trail.push_back({d.cell, d.pos + 1});
        return true;
      }
    }
    return false;
  }

  bool cover_ok() {
    std::uint32_t covered = 0;
    for (std::uint32_t w = 0; w < n_worlds; ++w) {
      auto r = run_world(w, true);
      if (r.st != RunStatus::Pass) return false;
      covered |= r.generated;
      if (covered == all_events) return true;
    }
    return false;
  }

  CompatResult solve() {
    for (;;) {
      if (queue.empty()) {
        if (!eventwise && !cover_ok()) {
          if (!backtrack()) return exhausted();
          continue;
        }
        return found();
      }
      std::uint32_t w = queue.back();
      queue.pop_back();
      in_queue[w] = 0;
      auto r = run_world(w, false);
      switch (r.st) {
        case RunStatus::Pass: break;
        case RunStatus::Blocked:
          assign(r.blocked_cell, 0);
          trail.push_back({r.blocked_cell, 0});
          if (!in_queue[w]) {
            in_queue[w] = 1;
            queue.push_back(w);
          }
          break;
        case RunStatus::Fail:
          if (!in_queue[w]) {
            in_queue[w] = 1;
            queue.push_back(w);
          }
          if (!backtrack()) return exhausted();
          break;
      }
    }
  }

  CompatResult found() {
    CompatResult out;
    out.compatible = true;
    out.explored = explored;
    out.model.latent_card = c;
    out.model.tables.resize(n);
    for (const auto& nd : nodes) {
      auto& t = out.model.tables[nd.id];
      t.assign(nd.obs_ctx * nd.lat_ctx, 1);  // unreached cells pinned to {0}
      for (std::uint32_t i = 0; i < nd.obs_ctx * nd.lat_ctx; ++i)
        if (table[nd.base + i]) t[i] = table[nd.base + i];
    }
    return out;
  }

  CompatResult exhausted() {
    CompatResult out;
    out.compatible = false;
    out.explored = explored;
    return out;
  }
};

bool is_product_support(const Support& s) {
  std::uint64_t prod = 1;
  for (int v = 0; v < s.n(); ++v) {
    std::uint32_t seen = 0;
    for (std::uint32_t e : s.events) seen |= 1u << s.value_of(e, v);
    prod *= (std::uint64_t)std::popcount(seen);
  }
  return prod == s.events.size();
}

DeterministicModel product_model(const Support& s, const MDag& g) {
  DeterministicModel model;
  model.latent_card = 1;
  model.tables.resize(g.n);
  for (int v = 0; v < g.n; ++v) {
    std::uint16_t seen = 0;
    for (std::uint32_t e : s.events) seen |= (std::uint16_t)(1u << s.value_of(e, v));
    std::uint32_t ctx = 1;
    for_each_bit(g.obs_parents[v], [&](int u) { ctx *= (std::uint32_t)s.cards[u]; });
    model.tables[v].assign(ctx, seen);
  }
  return model;
}

}  // namespace

CompatResult support_compatible(const Support& s, const MDag& g, int bound,
                                const SolverOptions& opts) {
  if ((int)s.cards.size() != g.n) throw ArityError("support arity does not match graph");
  int m = (int)s.events.size();
  if (bound == 0) bound = m;
  if (bound < 1) throw ArityError("latent cardinality bound must be positive");

  if (m == 1) {
    CompatResult r;
    r.compatible = true;
    r.model = product_model(s, g);
    return r;
  }
  if (trivially_incompatible(s, g)) {
    CompatResult r;
    r.compatible = false;
    return r;
  }
  if (is_product_support(s)) {
    CompatResult r;
    r.compatible = true;
    r.model = product_model(s, g);
    return r;
  }

  std::uint64_t spent = 0;
  if (bound == m) {
    if (m > 2 && !g.facets.empty()) {
      Engine quick(s, g, 2, false);
      quick.budget = kQuickPassBudget;
      quick.reverse_values = opts.reverse_value_order;
      try {
        CompatResult r = quick.solve();
        if (r.compatible) return r;
        spent = r.explored;  // inconclusive below the true bound
      } catch (const TimeoutError& t) {
        spent = t.explored;
      }
    }
    Engine eng(s, g, m, true);
    eng.budget = opts.budget ? (opts.budget > spent ? opts.budget - spent : 1) : 0;
    eng.reverse_values = opts.reverse_value_order;
    CompatResult r = eng.solve();
    r.explored += spent;
    return r;
  }
  // bound != |S|: run the general engine at the requested cardinality
  // (capped at |S|+1, beyond which extra values cannot matter)
  Engine eng(s, g, std::min(bound, m + 1), false);
  eng.budget = opts.budget;
  eng.reverse_values = opts.reverse_value_order;
  return eng.solve();
}

bool model_generates(const DeterministicModel& model, const Support& s, const MDag& g) {
  int n = g.n, k = (int)g.facets.size(), c = model.latent_card;
  if ((int)model.tables.size() != n) return false;
  std::uint64_t n_worlds = 1;
  for (int i = 0; i < k; ++i) n_worlds *= (std::uint64_t)c;

  std::vector<int> order;
  {
    std::vector<int> indeg(n);
    for (int v = 0; v < n; ++v) indeg[v] = popcount(g.obs_parents[v]);
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

  std::vector<std::uint32_t> generated;
  std::vector<int> values(n);
  bool ok = true;
  for (std::uint64_t w = 0; w < n_worlds && ok; ++w) {
    std::function<void(int)> rec = [&](int p) {
      if (!ok) return;
      if (p == n) {
        generated.push_back(s.encode(values));
        return;
      }
      int v = order[p];
      std::uint32_t octx = 0, stride = 1;
      for_each_bit(g.obs_parents[v], [&](int u) {
        octx += (std::uint32_t)values[u] * stride;
        stride *= (std::uint32_t)s.cards[u];
      });
      std::uint32_t lctx = 0, lat_ctx_count = 1;
      for (int f = 0; f < k; ++f) {
        if (!has_bit(g.facets[f], v)) continue;
        std::uint64_t digit = w;
        for (int f2 = 0; f2 < f; ++f2) digit /= (std::uint64_t)c;
        lctx = lctx * (std::uint32_t)c + (std::uint32_t)(digit % (std::uint64_t)c);
        lat_ctx_count *= (std::uint32_t)c;
      }
      std::uint32_t cell = octx * lat_ctx_count + lctx;
      if (cell >= model.tables[v].size()) {
        ok = false;
        return;
      }
      std::uint16_t mask = model.tables[v][cell];
      if (!mask) {
        ok = false;
        return;
      }
      for (int val = 0; val < s.cards[v]; ++val)
        if ((mask >> val) & 1) {
          values[v] = val;
          rec(p + 1);
        }
    };
    rec(0);
  }
  if (!ok) return false;
  std::sort(generated.begin(), generated.end());
  generated.erase(std::unique(generated.begin(), generated.end()), generated.end());
  return generated == s.events;
}

// ---------------------------------------------------------------------------
// latent-free construction
// ---------------------------------------------------------------------------

RationalDistribution latent_free_support_distribution(const Dag& h, const Support& s) {
  if (h.n_lat != 0) throw ArityError("construction requires a latent-free graph");
  if ((int)s.cards.size() != h.n_obs) throw ArityError("support arity does not match graph");
  if (trivially_incompatible(s, h))
    throw PreconditionError("support conflicts with a d-separation relation of the graph");

  int n = h.n_obs;
  RationalDistribution dist;
  dist.support_decl = s;

  auto co_values = [&](int v, std::uint32_t event_code) {
    NodeMask pa = h.parents[v] & full_mask(n);
    std::uint32_t want = project(s, event_code, pa);
    std::uint32_t seen = 0;
    for (std::uint32_t e : s.events)
      if (project(s, e, pa) == want) seen |= 1u << s.value_of(e, v);
    return seen;
  };

  for (std::uint32_t e : s.events) {
    Rational w(1, 1);
    for (int v = 0; v < n; ++v) w = w * Rational(1, std::popcount(co_values(v, e)));
    dist.weights[e] = w;
  }

  // the factorized support must coincide with the requested one
  for (std::uint32_t code = 0; code < s.space(); ++code) {
    bool positive = true;
    for (int v = 0; v < n && positive; ++v) {
      std::uint32_t seen = co_values(v, code);
      if (seen && !((seen >> s.value_of(code, v)) & 1)) positive = false;
      // unseen parent context: the conditional there is uniform, any value
    }
    bool in_s = std::binary_search(s.events.begin(), s.events.end(), code);
    if (positive != in_s)
      throw PreconditionError("factorized support deviates from the requested one");
  }
  return dist;
}

// ---------------------------------------------------------------------------
// support enumeration and the staged incompatibility search
// ---------------------------------------------------------------------------

void enumerate_supports(const std::vector<int>& cards, const SupportEnumOptions& opts,
                        const std::function<bool(const Support&)>& emit) {
  std::uint64_t space = 1;
  for (int c : cards) {
    if (c < 1) throw ArityError("cardinalities must be positive");
    space *= (std::uint64_t)c;
  }
  if (space > opts.cap) throw CapError("event space exceeds the exhaustive-mode cap");
  if (space > 24) throw CapError("event space larger than 24 is not supported");
  int p = (int)space;
  int n = (int)cards.size();

  // group action on event codes: per-node value permutations composed with
  // cardinality-preserving node relabelings
  std::vector<std::vector<int>> luts;
  if (opts.symmetry_reduction) {
    std::vector<std::vector<int>> node_perms = opts.automorphisms;
    if (node_perms.empty()) {
      std::vector<int> id(n);
      std::iota(id.begin(), id.end(), 0);
      node_perms.push_back(id);
    }
    std::vector<std::vector<std::vector<int>>> vperms(n);
    for (int v = 0; v < n; ++v) {
      std::vector<int> perm(cards[v]);
      std::iota(perm.begin(), perm.end(), 0);
      do {
        vperms[v].push_back(perm);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    std::vector<int> choice(n, 0);
    for (;;) {
      for (const auto& np : node_perms) {
        bool ok = true;
        for (int v = 0; v < n; ++v)
          if (cards[np[v]] != cards[v]) ok = false;
        if (ok) {
          std::vector<int> lut(p);
          std::vector<int> vals(n), nv(n);
          for (int code = 0; code < p; ++code) {
            std::uint32_t rem = (std::uint32_t)code;
            for (int v = 0; v < n; ++v) {
              vals[v] = (int)(rem % (std::uint32_t)cards[v]);
              rem /= (std::uint32_t)cards[v];
            }
            for (int v = 0; v < n; ++v) nv[np[v]] = vperms[v][choice[v]][vals[v]];
            std::uint32_t out = 0, stride = 1;
            for (int v = 0; v < n; ++v) {
              out += (std::uint32_t)nv[v] * stride;
              stride *= (std::uint32_t)cards[v];
            }
            lut[code] = (int)out;
          }
          luts.push_back(std::move(lut));
        }
      }
      int v = 0;
      while (v < n && ++choice[v] == (int)vperms[v].size()) choice[v++] = 0;
      if (v == n) break;
    }
    std::sort(luts.begin(), luts.end());
    luts.erase(std::unique(luts.begin(), luts.end()), luts.end());
  }

  // byte-split transform tables for fast orbit-minimum checks (p <= 16)
  std::vector<std::array<std::uint32_t, 512>> fast;
  bool use_fast = opts.symmetry_reduction && p <= 16;
  if (use_fast) {
    fast.resize(luts.size());
    for (std::size_t i = 0; i < luts.size(); ++i) {
      auto& f = fast[i];
      f.fill(0);
      for (int lo = 0; lo < 256; ++lo) {
        std::uint32_t img = 0;
        for (int b = 0; b < 8 && b < p; ++b)
          if ((lo >> b) & 1) img |= 1u << luts[i][b];
        f[lo] = img;
      }
      for (int hi = 0; hi < 256; ++hi) {
        std::uint32_t img = 0;
        for (int b = 0; b < 8 && b + 8 < p; ++b)
          if ((hi >> b) & 1) img |= 1u << luts[i][b + 8];
        f[256 + hi] = img;
      }
    }
  }

  auto orbit_min = [&](std::uint32_t mask) {
    if (use_fast) {
      for (const auto& f : fast) {
        std::uint32_t img = f[mask & 0xff] | f[256 + (mask >> 8)];
        if (img < mask) return false;
      }
      return true;
    }
    for (const auto& lut : luts) {
      std::uint32_t img = 0, mm = mask;
      while (mm) {
        int b = std::countr_zero(mm);
        mm &= mm - 1;
        img |= 1u << lut[b];
      }
      if (img < mask) return false;
    }
    return true;
  };

  std::vector<std::vector<std::uint32_t>> by_count(p + 1);
  std::uint32_t limit = (p >= 32) ? 0xffffffffu : ((1u << p) - 1);
  for (std::uint32_t mask = 1; mask <= limit; ++mask)
    by_count[std::popcount(mask)].push_back(mask);

  for (int count = 1; count <= p; ++count)
    for (std::uint32_t mask : by_count[count]) {
      if (opts.symmetry_reduction && !orbit_min(mask)) continue;
      Support sup;
      sup.cards = cards;
      std::uint32_t mm = mask;
      while (mm) {
        sup.events.push_back((std::uint32_t)std::countr_zero(mm));
        mm &= mm - 1;
      }
      if (!emit(sup)) return;
    }
}

SupportSchedule default_schedule(int n) {
  SupportSchedule sched;
  ScheduleEntry binary;
  binary.cards.assign(n, 2);
  binary.exhaustive = true;
  sched.entries.push_back(binary);
  if (n == 4) {
    ScheduleEntry ternary;
    ternary.cards = {3, 2, 2, 2};
    ternary.exhaustive = false;
    ternary.fixtures.push_back(make_support({3, 2, 2, 2}, {
                                                              {0, 0, 0, 0},
                                                              {0, 0, 1, 0},
                                                              {0, 1, 0, 0},
                                                              {1, 0, 0, 0},
                                                              {1, 1, 0, 0},
                                                              {2, 0, 0, 1},
                                                              {2, 1, 1, 0},
                                                          }));
    sched.entries.push_back(std::move(ternary));
  }
  return sched;
}

std::optional<SupportWitness> rapid_supports_test(const MDag& g, const SupportSchedule& schedule,
                                                  std::uint64_t budget,
                                                  RapidSupportsProgress* progress,
                                                  std::uint64_t seed) {
  RelationList rels = set_dsep_relations(g);
  RapidSupportsProgress local;
  RapidSupportsProgress& prog = progress ? *progress : local;
  prog = {};

  auto check_one = [&](const Support& s) -> bool {
    if (trivially_incompatible(s, g, rels)) return false;
    SolverOptions opts;
    if (budget) {
      if (prog.explored >= budget) throw TimeoutError(prog.explored);
      opts.budget = budget - prog.explored;
    }
    CompatResult r = support_compatible(s, g, 0, opts);
    prog.explored += r.explored;
    return !r.compatible;
  };

  for (const auto& entry : schedule.entries) {
    std::optional<SupportWitness> hit;
    if (entry.exhaustive) {
      SupportEnumOptions opts;
      opts.symmetry_reduction = true;
      opts.automorphisms = automorphisms(g);
      enumerate_supports(entry.cards, opts, [&](const Support& s) {
        if (check_one(s)) {
          hit = SupportWitness{s};
          return false;
        }
        return true;
      });
    } else {
      int n = g.n;
      std::vector<int> perm(n);
      std::vector<Support> tried;
      for (const Support& fix : entry.fixtures) {
        std::iota(perm.begin(), perm.end(), 0);
        do {
          Support relabeled;
          relabeled.cards.assign(n, 0);
          for (int v = 0; v < n; ++v) relabeled.cards[perm[v]] = fix.cards[v];
          for (std::uint32_t e : fix.events) {
            std::vector<int> vals(n);
            for (int v = 0; v < n; ++v) vals[perm[v]] = fix.value_of(e, v);
            relabeled.events.push_back(relabeled.encode(vals));
          }
          std::sort(relabeled.events.begin(), relabeled.events.end());
          if (std::find(tried.begin(), tried.end(), relabeled) == tried.end()) {
            tried.push_back(relabeled);
            if (check_one(relabeled)) hit = SupportWitness{relabeled};
          }
        } while (!hit && std::next_permutation(perm.begin(), perm.end()));
        if (hit) break;
      }
      if (!hit && entry.sample_count > 0) {
        std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
        std::uint64_t space = 1;
        for (int c : entry.cards) space *= (std::uint64_t)c;
        for (int i = 0; i < entry.sample_count && !hit; ++i) {
          Support s;
          s.cards = entry.cards;
          for (std::uint64_t e = 0; e < space; ++e)
            if (rng() & 1) s.events.push_back((std::uint32_t)e);
          if (s.events.empty()) continue;
          if (check_one(s)) hit = SupportWitness{s};
        }
      }
    }
    if (hit) return hit;
    ++prog.schedule_done;
  }
  return std::nullopt;
}

}  // namespace mdag
