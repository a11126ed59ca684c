#include "mdag/enumeration.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mdag {

namespace {

// DFS over the ordered node pairs; an edge u->v is admitted only while the
// running transitive closure stays acyclic, so only acyclic graphs are
// visited.
struct LfEnum {
  int n;
  std::vector<std::pair<int, int>> pairs;
  std::vector<NodeMask> parents;
  std::array<NodeMask, 8> desc{};  // reflexive closure
  const std::function<void(const std::vector<NodeMask>&)>* emit;

  void run() {
    for (int v = 0; v < n; ++v) desc[v] = bit(v);
    step(0);
  }

  void step(std::size_t i) {
    if (i == pairs.size()) {
      (*emit)(parents);
      return;
    }
    step(i + 1);  // edge absent
    auto [u, v] = pairs[i];
    if (has_bit(desc[v], u)) return;  // u already reachable from v
    parents[v] |= bit(u);
    std::array<NodeMask, 8> saved = desc;
    for (int w = 0; w < n; ++w)
      if (has_bit(desc[w], u) || w == u) desc[w] |= desc[v];
    step(i + 1);
    desc = saved;
    parents[v] &= ~bit(u);
  }
};

}  // namespace

void enumerate_latent_free(int n, const std::function<void(const std::vector<NodeMask>&)>& emit) {
  if (n < 1 || n > 6) throw RangeError("latent-free enumeration supports 1..6 nodes");
  LfEnum e;
  e.n = n;
  e.parents.assign(n, 0);
  e.emit = &emit;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (u != v) e.pairs.emplace_back(u, v);
  e.run();
}

std::vector<Dag> enumerate_latent_free(int n) {
  std::vector<Dag> out;
  enumerate_latent_free(n, [&](const std::vector<NodeMask>& pm) {
    std::vector<Edge> edges;
    for (int v = 0; v < n; ++v)
      for_each_bit(pm[v], [&](int u) { edges.emplace_back(u, v); });
    out.push_back(build_dag(n, 0, edges));
  });
  return out;
}

LatentFreeIndex build_latent_free_index(int n) {
  LatentFreeIndex idx;
  idx.n = n;
  enumerate_latent_free(n, [&](const std::vector<NodeMask>& pm) {
    std::vector<Edge> edges;
    for (int v = 0; v < n; ++v)
      for_each_bit(pm[v], [&](int u) { edges.emplace_back(u, v); });
    Dag d = build_dag(n, 0, edges);
    std::string key = dsep_fingerprint(d).serialize();
    idx.fingerprints.insert(key);
    auto it = idx.partner.find(key);
    if (it == idx.partner.end() || pm < it->second) idx.partner[key] = pm;
  });
  return idx;
}

std::string LatentFreeIndex::serialize() const {
  std::vector<std::string> keys(fingerprints.begin(), fingerprints.end());
  std::sort(keys.begin(), keys.end());
  std::string out;
  out += "LFIDX";
  out.push_back((char)kCacheFormatVersion);
  out.push_back((char)n);
  for (const auto& k : keys) {
    out.push_back((char)(k.size() & 0xff));
    out += k;
    const auto& pm = partner.at(k);
    for (NodeMask p : pm) out.push_back((char)p);
  }
  return out;
}

bool dsep_unmatched_in_latent_free(const Fingerprint& fp, const LatentFreeIndex& idx) {
  if (fp.n != idx.n) throw ArityError("index built for a different node count");
  return !idx.contains(fp);
}

namespace {

// Antichains over the size>=2 subsets of [n], streamed as sorted mask lists.
void antichain_dfs(const std::vector<NodeMask>& cand, std::size_t from,
                   std::vector<NodeMask>& chosen,
                   const std::function<void(const std::vector<NodeMask>&)>& emit) {
  emit(chosen);
  for (std::size_t j = from; j < cand.size(); ++j) {
    bool ok = true;
    for (NodeMask f : chosen)
      if ((f & cand[j]) == f || (f & cand[j]) == cand[j]) {
        ok = false;
        break;
      }
    if (!ok) continue;
    chosen.push_back(cand[j]);
    antichain_dfs(cand, j + 1, chosen, emit);
    chosen.pop_back();
  }
}

std::string encode_dag_labelled(int n, const std::vector<NodeMask>& pm, const int* perm) {
  std::string s(n, '\0');
  for (int v = 0; v < n; ++v) s[perm[v]] = (char)permute_mask(pm[v], perm);
  return s;
}

}  // namespace

std::vector<MDag> enumerate_mdags(int n) {
  if (n < 1 || n > 5) throw RangeError("mDAG enumeration supports 1..5 observed nodes");

  // Group labelled observed DAGs into isomorphism classes first; facets are
  // then deduplicated per class under the class representative's
  // automorphisms only.
  struct DagClass {
    std::vector<NodeMask> pm;
    std::vector<std::vector<int>> auts;
  };
  std::unordered_map<std::string, DagClass> classes;
  std::array<int, 6> perm;
  enumerate_latent_free(n, [&](const std::vector<NodeMask>& pm) {
    std::iota(perm.begin(), perm.begin() + n, 0);
    std::string best;
    do {
      std::string cur = encode_dag_labelled(n, pm, perm.data());
      if (best.empty() || cur < best) best = cur;
    } while (std::next_permutation(perm.begin(), perm.begin() + n));
    auto& cls = classes[best];
    if (cls.pm.empty()) {
      std::vector<NodeMask> rep(n);
      for (int v = 0; v < n; ++v) rep[v] = (NodeMask)(unsigned char)best[v];
      cls.pm = rep;
      std::iota(perm.begin(), perm.begin() + n, 0);
      do {
        if (encode_dag_labelled(n, rep, perm.data()) == best)
          cls.auts.emplace_back(perm.begin(), perm.begin() + n);
      } while (std::next_permutation(perm.begin(), perm.begin() + n));
    }
  });

  std::vector<NodeMask> cand;
  for (NodeMask f = 0; f <= full_mask(n); ++f)
    if (popcount(f) >= 2) cand.push_back(f);

  std::vector<std::string> codes;
  for (auto& [key, cls] : classes) {
    std::vector<NodeMask> chosen;
    antichain_dfs(cand, 0, chosen, [&](const std::vector<NodeMask>& facets) {
      // keep only the lexicographically least facet list over the DAG's
      // automorphisms
      std::vector<NodeMask> sorted(facets);
      std::sort(sorted.begin(), sorted.end());
      for (const auto& a : cls.auts) {
        std::vector<NodeMask> img;
        img.reserve(facets.size());
        for (NodeMask f : facets) img.push_back(permute_mask(f, a.data()));
        std::sort(img.begin(), img.end());
        if (img < sorted) return;
      }
      MDag m = normalize_mdag(n, cls.pm, facets);
      if (m.facets.size() != facets.size()) return;  // not already an antichain rep
      codes.push_back(canonical_form(m).bytes);
    });
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());

  std::vector<MDag> out;
  out.reserve(codes.size());
  for (const auto& c : codes) out.push_back(mdag_from_code(CanonicalCode{c}));
  return out;
}

MDag mdag_from_code(const CanonicalCode& code) {
  const std::string& b = code.bytes;
  if (b.empty()) throw RangeError("empty canonical code");
  int n = b[0];
  std::vector<NodeMask> pm(n);
  for (int v = 0; v < n; ++v) pm[v] = (NodeMask)(unsigned char)b[1 + v];
  int nf = b[1 + n];
  std::vector<NodeMask> facets(nf);
  for (int i = 0; i < nf; ++i) facets[i] = (NodeMask)(unsigned char)b[2 + n + i];
  return normalize_mdag(n, std::move(pm), std::move(facets));
}

namespace {

struct PatternSpec {
  const char* name;
  int family;
  std::initializer_list<Edge> edges;
  std::initializer_list<NodeMask> facets;
};

// Observed labels: X=0, Y=1, A=2, B=3.
constexpr NodeMask F_XY = 0b0011, F_XA = 0b0101, F_YB = 0b1010, F_AB = 0b1100;

const PatternSpec kPatterns[] = {
    {"a", 1, {{0, 2}, {1, 3}}, {F_AB}},
    {"b", 1, {{0, 2}, {1, 3}}, {F_XA, F_AB}},
    {"c", 1, {{1, 3}}, {F_XA, F_AB}},
    {"d", 1, {{0, 2}, {1, 3}}, {F_XA, F_AB, F_YB}},
    {"e", 1, {{1, 3}}, {F_XA, F_AB, F_YB}},
    {"f", 1, {}, {F_XA, F_AB, F_YB}},
    {"g", 2, {{0, 1}, {0, 2}, {1, 3}}, {F_AB}},
    {"h", 2, {{0, 1}, {0, 2}, {1, 3}}, {F_XA, F_AB}},
    {"i", 2, {{0, 1}, {1, 3}}, {F_XA, F_AB}},
    {"j", 2, {{0, 2}, {1, 3}}, {F_XY, F_AB}},
    {"k", 2, {{0, 1}, {0, 2}, {1, 3}}, {F_XY, F_AB}},
    {"l", 3, {}, {F_XY, F_XA, F_YB, F_AB}},
    {"m", 4, {{0, 1}, {0, 2}}, {F_YB, F_AB}},
    {"n", 4, {{0, 1}, {0, 2}}, {F_XA, F_YB, F_AB}},
    {"o", 4, {{0, 1}}, {F_XA, F_YB, F_AB}},
    {"p", 5, {{0, 2}, {2, 1}}, {F_YB, F_AB}},
    {"q", 5, {{0, 2}, {2, 1}}, {F_XA, F_YB, F_AB}},
    {"r", 5, {{2, 1}}, {F_XA, F_YB, F_AB}},
};

using RelationSet = std::vector<std::tuple<int, int, NodeMask>>;

std::vector<RelationSet> family_relation_sets() {
  auto rel = [](int x, int y, NodeMask z) {
    return std::tuple<int, int, NodeMask>{std::min(x, y), std::max(x, y), z};
  };
  const int X = 0, Y = 1, A = 2, B = 3;
  std::vector<RelationSet> fam(5);
  fam[0] = {rel(A, Y, 0),      rel(A, Y, bit(X)), rel(B, X, 0),     rel(B, X, bit(Y)),
            rel(X, Y, 0),      rel(X, Y, bit(A)), rel(X, Y, bit(B))};
  fam[1] = {rel(A, Y, bit(X)), rel(B, X, bit(Y))};
  fam[2] = {rel(A, Y, 0),      rel(B, X, 0)};
  fam[3] = {rel(B, X, 0),      rel(A, Y, bit(X))};
  fam[4] = {rel(B, X, 0),      rel(X, Y, bit(A))};
  for (auto& f : fam) std::sort(f.begin(), f.end());
  return fam;
}

}  // namespace

PatternLibrary PatternLibrary::builtin() {
  PatternLibrary lib;
  lib.families = family_relation_sets();
  for (const auto& p : kPatterns) {
    Entry e;
    e.name = p.name;
    e.family = p.family;
    e.graph = make_mdag(4, std::vector<Edge>(p.edges), std::vector<NodeMask>(p.facets));
    lib.entries.push_back(std::move(e));
  }
  return lib;
}

void PatternLibrary::validate() const {
  if (entries.size() != 18) throw PreconditionError("pattern library must hold 18 graphs");
  std::array<bool, 5> seen{};
  std::unordered_set<std::string> codes;
  for (const auto& e : entries) {
    if (e.family < 1 || e.family > 5) throw PreconditionError("bad family id");
    seen[e.family - 1] = true;
    if (!codes.insert(canonical_form(e.graph).bytes).second)
      throw PreconditionError("duplicate pattern graph");
    RelationSet rels;
    for (auto [x, y, z] : dsep_fingerprint(e.graph).relations()) rels.emplace_back(x, y, z);
    std::sort(rels.begin(), rels.end());
    if (rels != families[e.family - 1])
      throw PreconditionError("pattern " + e.name + " does not realize its relation set");
  }
  for (bool s : seen)
    if (!s) throw PreconditionError("some relation-set family has no pattern");
}

bool dsep_unmatched_rapid(const MDag& m, const PatternLibrary& lib) {
  if (!is_maximal(m).maximal)
    throw PreconditionError("pattern-based test requires a maximal graph");
  if (m.n < 4) return false;
  Fingerprint fp = dsep_fingerprint(m);
  auto rels = fp.relations();

  NodeMask all = full_mask(m.n);
  std::array<int, 4> sub{};
  for (NodeMask t = 0; t <= all; ++t) {
    if (popcount(t) != 4) continue;
    int k = 0;
    for_each_bit(t, [&](int v) { sub[k++] = v; });
    // relations whose nodes and conditioning set live inside the subset
    RelationSet restricted;
    for (auto [x, y, z] : rels)
      if (has_bit(t, x) && has_bit(t, y) && (z & ~t) == 0) restricted.emplace_back(x, y, z);
    if (restricted.empty()) continue;
    // try every assignment of the four subset nodes to pattern labels
    std::array<int, 4> asg{0, 1, 2, 3};
    std::sort(asg.begin(), asg.end());
    do {
      // asg[i]: pattern label given to subset node sub[i]
      int label_of[6];
      for (int i = 0; i < 4; ++i) label_of[sub[i]] = asg[i];
      RelationSet mapped;
      mapped.reserve(restricted.size());
      for (auto [x, y, z] : restricted) {
        int px = label_of[x], py = label_of[y];
        NodeMask pz = 0;
        for_each_bit(z, [&](int v) { pz |= bit(label_of[v]); });
        mapped.emplace_back(std::min(px, py), std::max(px, py), pz);
      }
      std::sort(mapped.begin(), mapped.end());
      for (const auto& fam : lib.families)
        if (mapped == fam) return true;
    } while (std::next_permutation(asg.begin(), asg.end()));
  }
  return false;
}

namespace {

std::string json_escape_minimal(const std::string& s) { return s; }  // names are [a-r]

}  // namespace

std::string PatternLibrary::dump_jsonl() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << "{\"name\":\"" << json_escape_minimal(e.name) << "\",\"family\":" << e.family
       << ",\"n\":" << e.graph.n << ",\"edges\":[";
    bool first = true;
    for (auto [u, v] : e.graph.edge_list()) {
      if (!first) os << ',';
      first = false;
      os << '[' << u << ',' << v << ']';
    }
    os << "],\"facets\":[";
    first = true;
    for (NodeMask f : e.graph.facets) {
      if (!first) os << ',';
      first = false;
      os << '[';
      bool f2 = true;
      for_each_bit(f, [&](int v) {
        if (!f2) os << ',';
        f2 = false;
        os << v;
      });
      os << ']';
    }
    os << "]}\n";
  }
  return os.str();
}

}  // namespace mdag
