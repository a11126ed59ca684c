#include "mdag/classify.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace mdag {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Hlp: return "hlp";
    case Stage::Nonmaximal: return "nonmaximal";
    case Stage::Setwise: return "setwise";
    case Stage::Subgraph: return "subgraph";
    case Stage::DsepLatentFree: return "dsep";
    case Stage::EsepLatentFree: return "esep";
    case Stage::Supports: return "supports";
    case Stage::None: return "none";
  }
  return "none";
}

Stage stage_from_name(const std::string& name) {
  for (Stage s : {Stage::Hlp, Stage::Nonmaximal, Stage::Setwise, Stage::Subgraph,
                  Stage::DsepLatentFree, Stage::EsepLatentFree, Stage::Supports})
    if (name == stage_name(s)) return s;
  throw RangeError("unknown stage: " + name);
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Algebraic: return "Algebraic";
    case Status::NonAlgebraic: return "NonAlgebraic";
    case Status::Unresolved: return "Unresolved";
  }
  return "Unresolved";
}

std::vector<std::pair<HlpStep, MDag>> hlp_neighbors(const MDag& m) {
  std::vector<std::pair<HlpStep, MDag>> out;

  // drop an observed edge
  for (auto [u, v] : m.edge_list()) {
    auto pm = m.obs_parents;
    pm[v] &= ~bit(u);
    out.push_back({HlpStep{StepKind::RemoveEdge, u, v, 0}, normalize_mdag(m.n, pm, m.facets)});
  }

  // drop one member from one facet (a latent-to-observed edge)
  for (NodeMask f : m.facets) {
    for_each_bit(f, [&](int v) {
      std::vector<NodeMask> facets;
      for (NodeMask g : m.facets) facets.push_back(g == f ? (g & ~bit(v)) : g);
      out.push_back(
          {HlpStep{StepKind::RemoveFacetMember, v, 0, f}, normalize_mdag(m.n, m.obs_parents, facets)});
    });
  }

  // add an edge x->y when x's parents (facets included) sit inside y's and
  // x has a latent parent
  for (int x = 0; x < m.n; ++x) {
    NodeMask x_facets = 0, y_facets;
    int nf = (int)m.facets.size();
    for (int f = 0; f < nf; ++f)
      if (has_bit(m.facets[f], x)) x_facets |= bit(f);
    if (!x_facets) continue;
    for (int y = 0; y < m.n; ++y) {
      if (x == y || m.has_edge(x, y)) continue;
      if (has_bit(m.desc[y], x)) continue;  // would close a cycle
      if (m.obs_parents[x] & ~m.obs_parents[y]) continue;
      y_facets = 0;
      for (int f = 0; f < nf; ++f)
        if (has_bit(m.facets[f], y)) y_facets |= bit(f);
      if (x_facets & ~y_facets) continue;
      auto pm = m.obs_parents;
      pm[y] |= bit(x);
      out.push_back({HlpStep{StepKind::AddEdge, x, y, 0}, normalize_mdag(m.n, pm, m.facets)});
    }
  }
  return out;
}

std::optional<HlpPath> hlp_criterion(const MDag& m) {
  Fingerprint target = dsep_fingerprint(m);
  if (m.latent_free()) return HlpPath{{}, m.obs_parents};

  struct NodeRec {
    MDag g;
    int parent;
    HlpStep step;
  };
  std::vector<NodeRec> arena;
  std::unordered_set<std::string> seen;
  arena.push_back({m, -1, {}});
  seen.insert(canonical_form(m).bytes);
  std::deque<int> frontier{0};

  auto reconstruct = [&](int leaf) {
    HlpPath path;
    path.final_parents = arena[leaf].g.obs_parents;
    std::vector<HlpStep> rev;
    for (int i = leaf; arena[i].parent >= 0; i = arena[i].parent) rev.push_back(arena[i].step);
    path.steps.assign(rev.rbegin(), rev.rend());
    return path;
  };

  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    for (auto& [step, next] : hlp_neighbors(arena[cur].g)) {
      std::string code = canonical_form(next).bytes;
      if (!seen.insert(code).second) continue;
      int id = (int)arena.size();
      arena.push_back({next, cur, step});
      if (next.latent_free() && dsep_fingerprint(next) == target) return reconstruct(id);
      frontier.push_back(id);
    }
  }
  return std::nullopt;
}

bool esep_unmatched_via_partner(const MDag& m, const LatentFreeIndex& idx, EsepProof* proof) {
  if (idx.n != m.n) throw ArityError("index built for a different node count");
  std::string key = dsep_fingerprint(m).serialize();
  auto it = idx.partner.find(key);
  if (it == idx.partner.end())
    throw NoPartnerError("no latent-free graph shares these d-separations");
  std::vector<Edge> edges;
  for (int v = 0; v < m.n; ++v)
    for_each_bit(it->second[v], [&](int u) { edges.emplace_back(u, v); });
  Dag h = build_dag(m.n, 0, edges);

  Fingerprint eg = esep_fingerprint(m);
  Fingerprint eh = esep_fingerprint(h);
  if (eg == eh) return false;
  if (proof) {
    proof->partner_parents = it->second;
    // locate one differing quadruple
    bool done = false;
    for (int y = 0; y < m.n && !done; ++y)
      for (int x = 0; x < y && !done; ++x) {
        std::uint32_t diff =
            eg.pair_bits[pair_index(x, y)] ^ eh.pair_bits[pair_index(x, y)];
        if (!diff) continue;
        int code = std::countr_zero(diff);
        NodeMask others = full_mask(m.n) & ~bit(x) & ~bit(y);
        NodeMask zm = 0, wm = 0;
        int t = code;
        for_each_bit(others, [&](int v) {
          int d = t % 3;
          t /= 3;
          if (d == 1) zm |= bit(v);
          if (d == 2) wm |= bit(v);
        });
        proof->x = x;
        proof->y = y;
        proof->z = zm;
        proof->w = wm;
        proof->holds_in_graph = (eg.pair_bits[pair_index(x, y)] >> code) & 1u;
        done = true;
      }
  }
  return true;
}

std::optional<SubgraphWitness> subgraph_nonalgebraic(const MDag& m, const VerdictStore& lower) {
  NodeMask all = full_mask(m.n);
  for (NodeMask drop = 1; drop < all; ++drop) {
    MDag reduced = delete_observed(m, drop);
    if (reduced.n < 1) continue;
    auto it = lower.find(canonical_form(reduced).bytes);
    if (it != lower.end() && it->second.status == Status::NonAlgebraic) {
      SubgraphWitness w;
      w.deleted = drop;
      w.inner_code = canonical_form(reduced).text();
      w.inner_stage = it->second.stage;
      return w;
    }
  }
  return std::nullopt;
}

Verdict classify(const MDag& m, const StageConfig& cfg, const ClassifyContext& ctx) {
  Verdict out;
  bool dsep_checked_matched = false;
  for (Stage stage : cfg.stages) {
    switch (stage) {
      case Stage::Hlp: {
        if (auto path = hlp_criterion(m)) {
          out.status = Status::Algebraic;
          out.stage = Stage::Hlp;
          out.witness = std::move(*path);
          return out;
        }
        break;
      }
      case Stage::Nonmaximal: {
        auto r = is_maximal(m);
        if (!r.maximal) {
          out.status = Status::NonAlgebraic;
          out.stage = Stage::Nonmaximal;
          out.witness = NonmaximalPair{r.witness_a, r.witness_b};
          return out;
        }
        break;
      }
      case Stage::Setwise: {
        auto r = is_setwise_maximal(m);
        if (!r.maximal) {
          out.status = Status::NonAlgebraic;
          out.stage = Stage::Setwise;
          out.witness = SetwiseSet{r.witness};
          return out;
        }
        break;
      }
      case Stage::Subgraph: {
        if (m.n < 5) break;
        if (!ctx.lower) throw MissingStoreError("subgraph stage needs verdicts for smaller graphs");
        if (auto w = subgraph_nonalgebraic(m, *ctx.lower)) {
          out.status = Status::NonAlgebraic;
          out.stage = Stage::Subgraph;
          out.witness = std::move(*w);
          return out;
        }
        break;
      }
      case Stage::DsepLatentFree: {
        if (!ctx.index) throw MissingStoreError("d-separation stage needs the latent-free index");
        Fingerprint fp = dsep_fingerprint(m);
        if (dsep_unmatched_in_latent_free(fp, *ctx.index)) {
          out.status = Status::NonAlgebraic;
          out.stage = Stage::DsepLatentFree;
          out.witness = DsepProof{fp.to_json(), ctx.index->n, kCacheFormatVersion};
          return out;
        }
        dsep_checked_matched = true;
        break;
      }
      case Stage::EsepLatentFree: {
        if (!ctx.index) throw MissingStoreError("e-separation stage needs the latent-free index");
        try {
          EsepProof proof;
          if (esep_unmatched_via_partner(m, *ctx.index, &proof)) {
            out.status = Status::NonAlgebraic;
            out.stage = Stage::EsepLatentFree;
            out.witness = std::move(proof);
            return out;
          }
        } catch (const NoPartnerError&) {
          if (dsep_checked_matched) throw;  // cannot happen after a match
          out.note = "esep stage skipped: no latent-free partner";
        }
        break;
      }
      case Stage::Supports: {
        RapidSupportsProgress prog;
        try {
          if (auto w = rapid_supports_test(m, cfg.schedule, cfg.solver_budget, &prog, cfg.seed)) {
            out.status = Status::NonAlgebraic;
            out.stage = Stage::Supports;
            out.witness = std::move(*w);
            out.schedule_done = prog.schedule_done;
            return out;
          }
          out.schedule_done = prog.schedule_done;
        } catch (const TimeoutError& t) {
          out.schedule_done = prog.schedule_done;
          out.note = "supports stage timed out after " + std::to_string(t.explored) + " nodes";
        }
        break;
      }
      case Stage::None: break;
    }
  }
  out.status = Status::Unresolved;
  out.stage = Stage::None;
  return out;
}

namespace {

bool verify_hlp_path(const MDag& m, const HlpPath& path) {
  MDag cur = m;
  for (const HlpStep& step : path.steps) {
    switch (step.kind) {
      case StepKind::RemoveEdge: {
        if (!cur.has_edge(step.a, step.b)) return false;
        auto pm = cur.obs_parents;
        pm[step.b] &= ~bit(step.a);
        cur = normalize_mdag(cur.n, pm, cur.facets);
        break;
      }
      case StepKind::RemoveFacetMember: {
        auto it = std::find(cur.facets.begin(), cur.facets.end(), step.facet);
        if (it == cur.facets.end() || !has_bit(step.facet, step.a)) return false;
        std::vector<NodeMask> facets;
        for (NodeMask g : cur.facets)
          facets.push_back(g == step.facet ? (g & ~bit(step.a)) : g);
        cur = normalize_mdag(cur.n, cur.obs_parents, facets);
        break;
      }
      case StepKind::AddEdge: {
        int x = step.a, y = step.b;
        if (x == y || cur.has_edge(x, y) || has_bit(cur.desc[y], x)) return false;
        if (cur.obs_parents[x] & ~cur.obs_parents[y]) return false;
        bool x_in_facet = false, contained = true;
        for (NodeMask f : cur.facets) {
          if (has_bit(f, x)) {
            x_in_facet = true;
            if (!has_bit(f, y)) contained = false;
          }
        }
        if (!x_in_facet || !contained) return false;
        auto pm = cur.obs_parents;
        pm[y] |= bit(x);
        cur = normalize_mdag(cur.n, pm, cur.facets);
        break;
      }
    }
  }
  if (!cur.latent_free()) return false;
  if (!path.final_parents.empty() && cur.obs_parents != path.final_parents) return false;
  return dsep_fingerprint(cur) == dsep_fingerprint(m);
}

}  // namespace

bool verify_witness(const MDag& m, const Verdict& v, const ClassifyContext& ctx) {
  try {
    switch (v.status) {
      case Status::Unresolved: return true;
      case Status::Algebraic: {
        const auto* path = std::get_if<HlpPath>(&v.witness);
        return path && verify_hlp_path(m, *path);
      }
      case Status::NonAlgebraic: break;
    }
    if (const auto* p = std::get_if<NonmaximalPair>(&v.witness)) {
      if (p->a < 0 || p->b < 0 || p->a >= m.n || p->b >= m.n || p->a == p->b) return false;
      return !adjacent(m, p->a, p->b) && !pair_d_separable(m, p->a, p->b);
    }
    if (const auto* sw = std::get_if<SetwiseSet>(&v.witness)) {
      if (popcount(sw->set) < 2 || (sw->set & ~full_mask(m.n))) return false;
      return setwise_d_unrestricted(m, sw->set) && !setwise_adjacent(m, sw->set);
    }
    if (const auto* dp = std::get_if<DsepProof>(&v.witness)) {
      if (!ctx.index || ctx.index->n != m.n) return false;
      Fingerprint fp = dsep_fingerprint(m);
      if (fp.to_json() != dp->fingerprint_json) return false;
      return dsep_unmatched_in_latent_free(fp, *ctx.index);
    }
    if (const auto* ep = std::get_if<EsepProof>(&v.witness)) {
      if ((int)ep->partner_parents.size() != m.n) return false;
      std::vector<Edge> edges;
      for (int w = 0; w < m.n; ++w)
        for_each_bit(ep->partner_parents[w], [&](int u) { edges.emplace_back(u, w); });
      Dag h = build_dag(m.n, 0, edges);
      if (!(dsep_fingerprint(h) == dsep_fingerprint(m))) return false;
      SepQuery q{bit(ep->x), bit(ep->y), ep->z, ep->w};
      bool in_g = e_separated(m, q);
      MDag hm = to_mdag(h);
      bool in_h = e_separated(hm, q);
      return in_g != in_h && in_g == ep->holds_in_graph;
    }
    if (const auto* sup = std::get_if<SupportWitness>(&v.witness)) {
      if ((int)sup->support.cards.size() != m.n) return false;
      if (trivially_incompatible(sup->support, m)) return false;
      SolverOptions opts;
      opts.reverse_value_order = true;  // independent configuration
      return !support_compatible(sup->support, m, 0, opts).compatible;
    }
    if (const auto* sg = std::get_if<SubgraphWitness>(&v.witness)) {
      if (!ctx.lower) return false;
      if (!sg->deleted || (sg->deleted & ~full_mask(m.n))) return false;
      MDag reduced = delete_observed(m, sg->deleted);
      CanonicalCode code = canonical_form(reduced);
      if (code.text() != sg->inner_code) return false;
      auto it = ctx.lower->find(code.bytes);
      return it != ctx.lower->end() && it->second.status == Status::NonAlgebraic;
    }
    return false;
  } catch (...) {
    return false;
  }
}

}  // namespace mdag
