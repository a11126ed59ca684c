#include "mdag/json_io.hpp"

#include <json.hpp>

#include <fstream>

namespace mdag {

using nlohmann::json;

namespace {

json mask_to_array(NodeMask m) {
  json a = json::array();
  for_each_bit(m, [&](int v) { a.push_back(v); });
  return a;
}

NodeMask mask_from_array(const json& a) {
  NodeMask m = 0;
  for (const auto& v : a) m |= bit(v.get<int>());
  return m;
}

json edges_to_array(const std::vector<Edge>& edges) {
  json a = json::array();
  for (auto [u, v] : edges) a.push_back(json::array({u, v}));
  return a;
}

std::vector<Edge> edges_from_array(const json& a) {
  std::vector<Edge> out;
  for (const auto& e : a) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return out;
}

}  // namespace

std::string mdag_to_json(const MDag& m) {
  json j;
  j["n"] = m.n;
  j["edges"] = edges_to_array(m.edge_list());
  json facets = json::array();
  for (NodeMask f : m.facets) facets.push_back(mask_to_array(f));
  j["facets"] = facets;
  return j.dump();
}

MDag mdag_from_json(const std::string& text) {
  json j = json::parse(text);
  int n = j.at("n").get<int>();
  std::vector<NodeMask> facets;
  if (j.contains("facets"))
    for (const auto& f : j["facets"]) facets.push_back(mask_from_array(f));
  return make_mdag(n, j.contains("edges") ? edges_from_array(j["edges"]) : std::vector<Edge>{},
                   facets);
}

std::string dag_to_json(const Dag& g) {
  json j;
  j["n_obs"] = g.n_obs;
  j["n_lat"] = g.n_lat;
  j["edges"] = edges_to_array(g.edge_list());
  return j.dump();
}

Dag dag_from_json(const std::string& text) {
  json j = json::parse(text);
  return build_dag(j.at("n_obs").get<int>(), j.at("n_lat").get<int>(),
                   j.contains("edges") ? edges_from_array(j["edges"]) : std::vector<Edge>{});
}

MDag any_graph_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.contains("n_obs")) return to_mdag(dag_from_json(text));
  return mdag_from_json(text);
}

std::string support_to_json(const Support& s) {
  json j;
  j["cards"] = s.cards;
  json events = json::array();
  for (std::uint32_t e : s.events) events.push_back(s.decode(e));
  j["events"] = events;
  return j.dump();
}

Support support_from_json(const std::string& text) {
  json j = json::parse(text);
  std::vector<int> cards = j.at("cards").get<std::vector<int>>();
  std::vector<std::vector<int>> events;
  for (const auto& e : j.at("events")) events.push_back(e.get<std::vector<int>>());
  return make_support(std::move(cards), events);
}

namespace {

json witness_to_json(const Verdict& v) {
  json w;
  if (const auto* path = std::get_if<HlpPath>(&v.witness)) {
    w["type"] = "hlp_path";
    json steps = json::array();
    for (const HlpStep& s : path->steps) {
      json st;
      switch (s.kind) {
        case StepKind::RemoveEdge:
          st["op"] = "remove_edge";
          st["edge"] = json::array({s.a, s.b});
          break;
        case StepKind::RemoveFacetMember:
          st["op"] = "remove_facet_member";
          st["facet"] = mask_to_array(s.facet);
          st["member"] = s.a;
          break;
        case StepKind::AddEdge:
          st["op"] = "add_edge";
          st["edge"] = json::array({s.a, s.b});
          break;
      }
      steps.push_back(st);
    }
    w["steps"] = steps;
    json fin = json::array();
    for (std::size_t v2 = 0; v2 < path->final_parents.size(); ++v2)
      fin.push_back(mask_to_array(path->final_parents[v2]));
    w["final_parent_sets"] = fin;
  } else if (const auto* p = std::get_if<NonmaximalPair>(&v.witness)) {
    w["type"] = "nonmaximal_pair";
    w["pair"] = json::array({p->a, p->b});
  } else if (const auto* sw = std::get_if<SetwiseSet>(&v.witness)) {
    w["type"] = "setwise_set";
    w["set"] = mask_to_array(sw->set);
  } else if (const auto* dp = std::get_if<DsepProof>(&v.witness)) {
    w["type"] = "dsep_unmatched";
    w["fingerprint"] = json::parse(dp->fingerprint_json);
    w["index_n"] = dp->index_n;
    w["index_version"] = dp->index_version;
  } else if (const auto* ep = std::get_if<EsepProof>(&v.witness)) {
    w["type"] = "esep_mismatch";
    json pp = json::array();
    for (NodeMask m : ep->partner_parents) pp.push_back(mask_to_array(m));
    w["partner_parent_sets"] = pp;
    w["x"] = ep->x;
    w["y"] = ep->y;
    w["z"] = mask_to_array(ep->z);
    w["w"] = mask_to_array(ep->w);
    w["holds_in_graph"] = ep->holds_in_graph;
  } else if (const auto* sup = std::get_if<SupportWitness>(&v.witness)) {
    w["type"] = "incompatible_support";
    w["support"] = json::parse(support_to_json(sup->support));
  } else if (const auto* sg = std::get_if<SubgraphWitness>(&v.witness)) {
    w["type"] = "nonalgebraic_subgraph";
    w["deleted"] = mask_to_array(sg->deleted);
    w["inner_code"] = sg->inner_code;
    w["inner_stage"] = stage_name(sg->inner_stage);
  } else {
    w["type"] = "none";
  }
  return w;
}

Witness witness_from_json(const json& w, Status status) {
  std::string type = w.value("type", "none");
  if (type == "hlp_path") {
    HlpPath path;
    for (const auto& st : w.at("steps")) {
      std::string op = st.at("op").get<std::string>();
      HlpStep s{};
      if (op == "remove_edge") {
        s.kind = StepKind::RemoveEdge;
        s.a = st.at("edge").at(0).get<int>();
        s.b = st.at("edge").at(1).get<int>();
      } else if (op == "remove_facet_member") {
        s.kind = StepKind::RemoveFacetMember;
        s.facet = mask_from_array(st.at("facet"));
        s.a = st.at("member").get<int>();
      } else if (op == "add_edge") {
        s.kind = StepKind::AddEdge;
        s.a = st.at("edge").at(0).get<int>();
        s.b = st.at("edge").at(1).get<int>();
      } else {
        throw CacheCorruptionError("unknown rewrite step: " + op);
      }
      path.steps.push_back(s);
    }
    for (const auto& pm : w.at("final_parent_sets")) path.final_parents.push_back(mask_from_array(pm));
    return path;
  }
  if (type == "nonmaximal_pair")
    return NonmaximalPair{w.at("pair").at(0).get<int>(), w.at("pair").at(1).get<int>()};
  if (type == "setwise_set") return SetwiseSet{mask_from_array(w.at("set"))};
  if (type == "dsep_unmatched")
    return DsepProof{w.at("fingerprint").dump(), w.at("index_n").get<int>(),
                     w.at("index_version").get<int>()};
  if (type == "esep_mismatch") {
    EsepProof ep;
    for (const auto& pm : w.at("partner_parent_sets")) ep.partner_parents.push_back(mask_from_array(pm));
    ep.x = w.at("x").get<int>();
    ep.y = w.at("y").get<int>();
    ep.z = mask_from_array(w.at("z"));
    ep.w = mask_from_array(w.at("w"));
    ep.holds_in_graph = w.at("holds_in_graph").get<bool>();
    return ep;
  }
  if (type == "incompatible_support")
    return SupportWitness{support_from_json(w.at("support").dump())};
  if (type == "nonalgebraic_subgraph") {
    SubgraphWitness sg;
    sg.deleted = mask_from_array(w.at("deleted"));
    sg.inner_code = w.at("inner_code").get<std::string>();
    sg.inner_stage = stage_from_name(w.at("inner_stage").get<std::string>());
    return sg;
  }
  if (type == "none" && status != Status::Unresolved)
    throw CacheCorruptionError("resolved verdict without witness");
  return std::monostate{};
}

std::string encode_code_bytes(const std::string& bytes) {
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out.push_back(hex[c >> 4]);
    out.push_back(hex[c & 15]);
  }
  return out;
}

std::string decode_code_bytes(const std::string& hexstr) {
  auto val = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw CacheCorruptionError("bad code encoding");
  };
  if (hexstr.size() % 2) throw CacheCorruptionError("bad code encoding");
  std::string out;
  for (std::size_t i = 0; i < hexstr.size(); i += 2)
    out.push_back((char)((val(hexstr[i]) << 4) | val(hexstr[i + 1])));
  return out;
}

}  // namespace

std::string verdict_to_json(const CanonicalCode& code, const Verdict& v) {
  json j;
  j["code"] = code.text();
  j["code_bytes"] = encode_code_bytes(code.bytes);
  j["status"] = status_name(v.status);
  j["stage"] = stage_name(v.stage);
  j["witness"] = witness_to_json(v);
  if (v.schedule_done) j["schedule_done"] = v.schedule_done;
  if (!v.note.empty()) j["note"] = v.note;
  return j.dump();
}

PatternLibrary PatternLibrary::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CacheCorruptionError("cannot open pattern fixture: " + path);
  PatternLibrary lib;
  lib.families = PatternLibrary::builtin().families;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Entry e;
    e.name = j.at("name").get<std::string>();
    e.family = j.at("family").get<int>();
    int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& ed : j.at("edges")) edges.emplace_back(ed.at(0).get<int>(), ed.at(1).get<int>());
    std::vector<NodeMask> facets;
    for (const auto& f : j.at("facets")) facets.push_back(mask_from_array(f));
    e.graph = make_mdag(n, edges, facets);
    lib.entries.push_back(std::move(e));
  }
  return lib;
}

std::pair<std::string, Verdict> verdict_from_json(const std::string& text) {
  json j = json::parse(text);
  Verdict v;
  std::string status = j.at("status").get<std::string>();
  if (status == "Algebraic")
    v.status = Status::Algebraic;
  else if (status == "NonAlgebraic")
    v.status = Status::NonAlgebraic;
  else if (status == "Unresolved")
    v.status = Status::Unresolved;
  else
    throw CacheCorruptionError("unknown status: " + status);
  std::string stage = j.at("stage").get<std::string>();
  v.stage = stage == "none" ? Stage::None : stage_from_name(stage);
  v.witness = witness_from_json(j.at("witness"), v.status);
  v.schedule_done = j.value("schedule_done", 0);
  v.note = j.value("note", std::string{});
  return {decode_code_bytes(j.at("code_bytes").get<std::string>()), v};
}

}  // namespace mdag
