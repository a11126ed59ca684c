#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdag/graph.hpp"
#include "mdag/separation.hpp"

namespace mdag {

/// A set of observed events with nonzero probability. Events are stored as
/// mixed-radix codes over `cards` (node 0 is the least significant digit),
/// sorted ascending and deduplicated.
struct Support {
  std::vector<int> cards;
  std::vector<std::uint32_t> events;

  int n() const { return (int)cards.size(); }
  std::size_t size() const { return events.size(); }
  std::uint32_t space() const;  // product of cards
  std::uint32_t encode(const std::vector<int>& values) const;
  std::vector<int> decode(std::uint32_t code) const;
  int value_of(std::uint32_t code, int node) const;
  bool full() const { return events.size() == space(); }
  bool operator==(const Support&) const = default;
};

Support make_support(std::vector<int> cards, const std::vector<std::vector<int>>& events);

/// Exact rational weights over event codes; weights sum to one.
struct Rational {
  long long num = 0;
  long long den = 1;
  Rational() = default;
  Rational(long long n, long long d);
  Rational operator*(const Rational& o) const;
  Rational operator+(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

struct RationalDistribution {
  Support support_decl;  // declared support (cards + events)
  std::map<std::uint32_t, Rational> weights;
};

/// Values witnessing a conflict between the support and one conditional
/// independence relation (A,B | C) implied by the graph.
struct ConflictWitness {
  NodeMask a_set = 0, b_set = 0, c_set = 0;
  std::vector<int> a_vals, b_vals, c_vals;  // aligned with ascending set bits
};

struct SupportEnumOptions {
  bool symmetry_reduction = false;
  std::vector<std::vector<int>> automorphisms;  // observed-node perms
  std::uint32_t cap = 1u << 16;                 // max event-space size
};

/// Streams all nonempty event subsets over `cards`, ordered by (event count,
/// code mask). With symmetry reduction only orbit minima under per-node value
/// permutations composed with the supplied graph automorphisms are emitted.
/// Return false from the callback to stop.
void enumerate_supports(const std::vector<int>& cards, const SupportEnumOptions& opts,
                        const std::function<bool(const Support&)>& emit);

/// Set-valued conditional independence relations of a graph, precomputed for
/// conflict scanning.
struct RelationList {
  int n = 0;
  std::vector<std::array<NodeMask, 3>> relations;  // (A, B, C) with A ⊥ B | C
};
RelationList set_dsep_relations(const MDag& m);

std::optional<ConflictWitness> trivially_incompatible(const Support& s, const MDag& g);
std::optional<ConflictWitness> trivially_incompatible(const Support& s, const MDag& g,
                                                      const RelationList& rels);
std::optional<ConflictWitness> trivially_incompatible(const Support& s, const Dag& g);

/// Deterministic functional model over the graph's facet latents (shared
/// cardinality `latent_card`); per-node response tables map (observed-parent
/// values, latent-parent values) to a nonempty set of output values (the
/// set absorbs the node's private noise).
struct DeterministicModel {
  int latent_card = 0;
  std::vector<std::vector<std::uint16_t>> tables;  // per node, value bitmasks
};

struct CompatResult {
  bool compatible = false;
  DeterministicModel model;       // populated when compatible
  std::uint64_t explored = 0;     // search nodes (the exhaustion certificate)
};

struct SolverOptions {
  std::uint64_t budget = 0;  // max search nodes, 0 = unlimited
  bool reverse_value_order = false;  // independent re-check configuration
};

/// Decides whether some classically compatible distribution has exactly this
/// support, with every latent cardinality bounded by `bound`
/// (default |S.events| when bound == 0).
CompatResult support_compatible(const Support& s, const MDag& g, int bound = 0,
                                const SolverOptions& opts = {});

/// Replays a model and checks it generates exactly `s`.
bool model_generates(const DeterministicModel& model, const Support& s, const MDag& g);

/// Markov factorization with uniform conditionals over the co-occurring
/// values; exact rational weights, support equal to `s`.
RationalDistribution latent_free_support_distribution(const Dag& h, const Support& s);

struct SupportWitness {
  Support support;
};

struct ScheduleEntry {
  std::vector<int> cards;
  bool exhaustive = true;             // otherwise targeted
  std::vector<Support> fixtures;      // targeted mode: tried under all relabelings
  int sample_count = 0;               // targeted mode: extra random supports
};
struct SupportSchedule {
  std::vector<ScheduleEntry> entries;
};
SupportSchedule default_schedule(int n);

struct RapidSupportsProgress {
  int schedule_done = 0;       // fully exhausted entries
  std::uint64_t explored = 0;  // solver nodes spent
  bool timed_out = false;
};

/// First support in schedule order that is incompatible yet not trivially
/// incompatible; None when the schedule is exhausted.
std::optional<SupportWitness> rapid_supports_test(const MDag& g, const SupportSchedule& schedule,
                                                  std::uint64_t budget = 0,
                                                  RapidSupportsProgress* progress = nullptr,
                                                  std::uint64_t seed = 0);

}  // namespace mdag
