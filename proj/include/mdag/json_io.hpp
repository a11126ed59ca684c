#pragma once

#include <string>

#include "mdag/classify.hpp"
#include "mdag/graph.hpp"
#include "mdag/supports.hpp"

namespace mdag {

// Graph lines: {"n":4,"edges":[[0,1]],"facets":[[0,1],[1,2,3]]} for mDAGs;
// {"n_obs":4,"n_lat":1,"edges":[[4,0],[4,1]]} for DAGs with explicit latents
// (latents indexed after the observed nodes).
std::string mdag_to_json(const MDag& m);
MDag mdag_from_json(const std::string& text);

std::string dag_to_json(const Dag& g);
Dag dag_from_json(const std::string& text);

/// Accepts either graph form and reduces DAGs to their mDAG.
MDag any_graph_from_json(const std::string& text);

std::string support_to_json(const Support& s);
Support support_from_json(const std::string& text);

std::string verdict_to_json(const CanonicalCode& code, const Verdict& v);
std::pair<std::string, Verdict> verdict_from_json(const std::string& text);  // code bytes, verdict

}  // namespace mdag
