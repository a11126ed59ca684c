#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "mdag/graph.hpp"
#include "mdag/separation.hpp"

using namespace mdag;

TEST_CASE("dag construction and validation") {
  Dag bell = fx::bell_dag();
  CHECK(bell.n_obs == 4);
  CHECK(bell.n_lat == 1);
  CHECK(bell.edge_list().size() == 4);

  Dag single = build_dag(1, 0, {});
  CHECK(single.total() == 1);

  CHECK_THROWS_AS(build_dag(2, 0, {{0, 1}, {1, 0}}), CycleError);
  CHECK_THROWS_AS(build_dag(2, 0, {{0, 5}}), IndexError);
  CHECK_THROWS_AS(build_dag(2, 0, {{1, 1}}), CycleError);
}

TEST_CASE("relatives and the self-ancestor convention") {
  Dag g = fx::relatives_demo();  // A=0 B=1 C=2 D=3 E=4
  CHECK(relatives(g, 1, Relation::Parents) == (bit(0) | bit(3)));
  CHECK(has_bit(relatives(g, 3, Relation::Descendants), 4));
  CHECK(!has_bit(relatives(g, 3, Relation::Children), 4));
  for (int v = 0; v < g.total(); ++v) {
    NodeMask both = relatives(g, v, Relation::Ancestors) & relatives(g, v, Relation::Descendants);
    CHECK(both == bit(v));
    CHECK(!has_bit(relatives(g, v, Relation::Parents), v));
  }
  CHECK_THROWS_AS(relatives(g, 9, Relation::Parents), IndexError);
}

TEST_CASE("exogenization rewires parents onto children") {
  Dag g = fx::reducible_dag();  // latents B=4 C=5
  Dag ex = exogenize(g, 4);
  CHECK(ex.parents[4] == 0);
  CHECK(has_bit(ex.parents[1], 0));  // A->D
  CHECK(has_bit(ex.parents[2], 0));  // A->E
  CHECK(has_bit(ex.parents[1], 5));  // C->D
  CHECK(has_bit(ex.parents[2], 5));  // C->E
  CHECK(ex.total() == g.total());

  // exogenous latent: no change
  Dag ex2 = exogenize(ex, 4);
  CHECK(ex2.edge_list() == ex.edge_list());

  // one parent, one child
  Dag chain = build_dag(2, 1, {{0, 2}, {2, 1}});
  Dag chain_ex = exogenize(chain, 2);
  CHECK(chain_ex.edge_list() == std::vector<Edge>{{0, 1}, {2, 1}});

  CHECK_THROWS_AS(exogenize(g, 0), NotLatentError);
}

TEST_CASE("exogenization preserves the observed d-separation fingerprint") {
  std::mt19937 rng(7);
  int graphs_checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int n_obs = 3, n_lat = 1 + (int)(rng() % 2);
    int total = n_obs + n_lat;
    std::vector<Edge> edges;
    for (int u = 0; u < total; ++u)
      for (int v = 0; v < total; ++v)
        if (u != v && rng() % 3 == 0) edges.emplace_back(u, v);
    Dag g;
    try {
      g = build_dag(n_obs, n_lat, edges);
    } catch (const CycleError&) {
      continue;
    }
    Fingerprint before = dsep_fingerprint(g);
    for (int l = n_obs; l < total; ++l) {
      Dag ex = exogenize(g, l);
      CHECK(dsep_fingerprint(ex) == before);
    }
    ++graphs_checked;
  }
  CHECK(graphs_checked > 100);
}

TEST_CASE("reduction to the canonical marginalized form") {
  MDag m = to_mdag(fx::reducible_dag());
  CHECK(m.n == 4);
  CHECK(m.facets == std::vector<NodeMask>{0b1110});  // {D,E,F}
  CHECK(m.edge_list() == std::vector<Edge>{{0, 1}, {0, 2}});

  MDag latent_free = to_mdag(build_dag(3, 0, {{0, 1}, {1, 2}}));
  CHECK(latent_free.facets.empty());
  CHECK(latent_free.edge_list() == std::vector<Edge>{{0, 1}, {1, 2}});

  // contained children sets collapse
  MDag merged = to_mdag(build_dag(3, 2, {{3, 0}, {3, 1}, {4, 0}, {4, 1}, {4, 2}}));
  CHECK(merged.facets == std::vector<NodeMask>{0b111});

  // single-child latents dissolve
  MDag absorbed = to_mdag(build_dag(2, 1, {{2, 0}}));
  CHECK(absorbed.facets.empty());
}

TEST_CASE("reduction is idempotent through embedding") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int n_obs = 2 + (int)(rng() % 3), n_lat = rng() % 3;
    int total = n_obs + n_lat;
    std::vector<Edge> edges;
    for (int u = 0; u < total; ++u)
      for (int v = 0; v < total; ++v)
        if (u != v && rng() % 3 == 0) edges.emplace_back(u, v);
    Dag g;
    try {
      g = build_dag(n_obs, n_lat, edges);
    } catch (const CycleError&) {
      continue;
    }
    MDag m = to_mdag(g);
    CHECK(to_mdag(embed(m)) == m);
  }
}

TEST_CASE("canonical form identifies relabelings and separates structures") {
  MDag a = make_mdag(2, {{0, 1}}, {0b11});
  MDag b = make_mdag(2, {{1, 0}}, {0b11});
  CHECK(canonical_form(a) == canonical_form(b));
  CHECK(canonical_form(fx::bell()) != canonical_form(fx::triangle()));

  std::mt19937 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 3 + (int)(rng() % 2);
    std::vector<NodeMask> pm(n, 0);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng() % 3 == 0) pm[v] |= bit(u);
    std::vector<NodeMask> facets;
    for (int t = 0; t < 2; ++t) {
      NodeMask f = (NodeMask)(rng() % (1u << n));
      if (popcount(f) >= 2) facets.push_back(f);
    }
    MDag m = normalize_mdag(n, pm, facets);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(canonical_form(m) == canonical_form(permuted(m, perm.data())));
  }
}

TEST_CASE("observed-node deletion shrinks facets and reindexes") {
  MDag uc = fx::unrelated_confounders();
  MDag dropped = delete_observed(uc, bit(0));  // remove the hub C
  CHECK(dropped.n == 2);
  CHECK(dropped.facets.empty());
  CHECK(dropped.edge_count() == 0);

  CHECK(delete_observed(uc, 0) == uc);

  MDag hg = fx::hourglass();
  MDag rest = delete_observed(hg, bit(0) | bit(2));  // drop D and E
  CHECK(rest.n == 2);
  CHECK(rest.facets.empty());
  CHECK(rest.edge_count() == 0);
}

TEST_CASE("adjacency covers edges and shared facets") {
  MDag bell = fx::bell();
  CHECK(adjacent(bell, 2, 3));   // outcome pair via facet
  CHECK(!adjacent(bell, 0, 1));  // settings unconnected
  CHECK(adjacent(bell, 0, 2));   // direct edge
  CHECK(!adjacent(fx::hourglass(), 1, 3));
  CHECK_THROWS_AS(adjacent(bell, 0, 0), IndexError);
  CHECK_THROWS_AS(adjacent(bell, 0, 9), IndexError);
}

TEST_CASE("validating constructor rejects malformed facet systems") {
  CHECK_THROWS_AS(make_mdag(3, {}, {0b001}), SizeError);         // singleton facet
  CHECK_THROWS_AS(make_mdag(3, {}, {0b011, 0b111}), SizeError);  // nested facets
  CHECK_THROWS_AS(make_mdag(2, {{0, 1}, {1, 0}}, {}), CycleError);
  CHECK_THROWS_AS(make_mdag(2, {}, {0b110}), IndexError);  // out of range
}
