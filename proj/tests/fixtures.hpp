#pragma once

// Named graphs and supports used across the test suites. Observed labels
// are listed next to each builder.

#include "mdag/graph.hpp"
#include "mdag/supports.hpp"

namespace fx {

using mdag::Dag;
using mdag::MDag;
using mdag::NodeMask;
using mdag::Support;

// X=0 Y=1 A=2 B=3: settings feed outcomes, outcomes share a latent
inline MDag bell() { return mdag::make_mdag(4, {{0, 2}, {1, 3}}, {0b1100}); }

// one latent per pair, no edges
inline MDag triangle() { return mdag::make_mdag(3, {}, {0b011, 0b101, 0b110}); }

// C=0 D=1 E=2: C feeds both, shares a latent with each
inline MDag unrelated_confounders() {
  return mdag::make_mdag(3, {{0, 1}, {0, 2}}, {0b011, 0b101});
}

// X=0 A=1 B=2
inline MDag instrumental() { return mdag::make_mdag(3, {{0, 1}, {1, 2}}, {0b110}); }

// A=0 B=1 C=2 D=3: two-branch chain with end-to-end latents
inline MDag bilocal_like() {
  return mdag::make_mdag(4, {{0, 1}, {0, 2}}, {0b1100, 0b1010});
}

// D=0 G=1 E=2 F=3: nonadjacent unseparable pair (G, F)
inline MDag hourglass() {
  return mdag::make_mdag(4, {{0, 2}, {2, 3}}, {0b1001, 0b0110, 0b0011});
}

// A=0 B=1 C=2 D=3: first graph resolved only through an incompatible support
inline MDag fraser_graph() {
  return mdag::make_mdag(4, {{1, 2}, {0, 3}, {2, 3}}, {0b1010, 0b0011, 0b0101});
}

// shared observed edges of the seven hardest 4-node graphs
inline std::vector<mdag::Edge> dense_chain_edges() {
  return {{0, 1}, {1, 2}, {1, 3}, {2, 3}};
}

inline MDag table2_graph(char which) {
  std::vector<NodeMask> facets;
  switch (which) {
    case 'a': facets = {0b1001, 0b0101, 0b0110}; break;
    case 'b': facets = {0b1001, 0b0101, 0b0110, 0b1100}; break;
    case 'c': facets = {0b1001, 0b0101, 0b1010}; break;
    case 'd': facets = {0b1001, 0b0101, 0b1010, 0b1100}; break;
    default: throw mdag::RangeError("table2 graph a..d");
  }
  return mdag::make_mdag(4, dense_chain_edges(), facets);
}

inline MDag table3_graph(char which) {
  std::vector<NodeMask> facets;
  switch (which) {
    case 'a': facets = {0b1110, 0b0101, 0b1001}; break;
    case 'b': facets = {0b0110, 0b1010, 0b0101, 0b1001}; break;
    case 'c': facets = {0b0110, 0b1010, 0b0101, 0b1001, 0b1100}; break;
    default: throw mdag::RangeError("table3 graph a..c");
  }
  return mdag::make_mdag(4, dense_chain_edges(), facets);
}

// A=0 C=1 D=2 E=3: worked rewrite example, (a) -> (b) -> latent-free (c)
inline MDag rewrite_demo_a() {
  return mdag::make_mdag(4, {{0, 2}, {1, 2}, {1, 3}}, {0b1100});
}
inline MDag rewrite_demo_b() {
  return mdag::make_mdag(4, {{0, 2}, {1, 2}, {1, 3}, {3, 2}}, {0b1100});
}
inline MDag rewrite_demo_c() {
  return mdag::make_mdag(4, {{0, 2}, {1, 2}, {1, 3}, {3, 2}}, {});
}

// A=0 B=1 C=2 (+ D=3): maximal but setwise-nonmaximal family
inline MDag setwise_demo_b() {
  return mdag::make_mdag(4, {{1, 3}, {3, 2}}, {0b0011, 0b0110, 0b0101});
}
inline MDag setwise_demo_c() {
  return mdag::make_mdag(4, {{1, 3}, {2, 3}}, {0b0011, 0b0110, 0b0101});
}

// C=0 D=1 E=2 F=3: deleting E separates F from D given C
inline MDag deletion_demo() {
  return mdag::make_mdag(4, {{0, 2}, {1, 2}, {0, 3}, {2, 3}}, {0b1001, 0b0101});
}

// X=0 Y=1 A=2 B=3 C=4: nonmaximal, d-separations unmatched by latent-free
inline MDag wide_hat() {
  return mdag::make_mdag(5, {{0, 2}, {1, 3}, {4, 2}, {4, 3}}, {0b10100, 0b11000});
}

// Fig-5-style reducible DAG: observed A=0 D=1 E=2 F=3, latents B=4 C=5
inline Dag reducible_dag() {
  return mdag::build_dag(4, 2, {{0, 4}, {5, 4}, {4, 1}, {4, 2}, {5, 3}});
}

inline Dag bell_dag() {
  // X=0 Y=1 A=2 B=3, latent 4
  return mdag::build_dag(4, 1, {{0, 2}, {1, 3}, {4, 2}, {4, 3}});
}

// example DAG used for parent/descendant conventions: A=0 B=1 C=2 D=3 E=4
inline Dag relatives_demo() {
  return mdag::build_dag(5, 0, {{3, 0}, {3, 2}, {2, 4}, {3, 1}, {0, 1}});
}

inline Support pr_box_support() {
  // order X, Y, A, B
  return mdag::make_support({2, 2, 2, 2}, {{0, 0, 0, 0},
                                           {0, 0, 1, 1},
                                           {0, 1, 0, 0},
                                           {0, 1, 1, 1},
                                           {1, 0, 0, 0},
                                           {1, 0, 1, 1},
                                           {1, 1, 1, 0},
                                           {1, 1, 0, 1}});
}

inline Support perfect_correlation_support() {
  return mdag::make_support({2, 2, 2}, {{0, 0, 0}, {0, 1, 1}});
}

inline Support fraser_support() {
  // order A, B, C, D
  return mdag::make_support({2, 2, 2, 2},
                            {{0, 0, 0, 0}, {0, 0, 0, 1}, {0, 1, 0, 0}, {1, 0, 1, 0}});
}

inline Support ternary_probe_support() {
  return mdag::make_support({3, 2, 2, 2}, {{0, 0, 0, 0},
                                           {0, 0, 1, 0},
                                           {0, 1, 0, 0},
                                           {1, 0, 0, 0},
                                           {1, 1, 0, 0},
                                           {2, 0, 0, 1},
                                           {2, 1, 1, 0}});
}

}  // namespace fx
