#pragma once

#include <bit>
#include <cstdint>

namespace mdag {

// Observed-node subsets as bitmasks. Node counts stay tiny (n <= 6 observed,
// plus facet latents), so everything fits in 32 bits.
using NodeMask = std::uint32_t;

inline int popcount(NodeMask m) { return std::popcount(m); }
inline int lowest_bit(NodeMask m) { return std::countr_zero(m); }
inline NodeMask bit(int i) { return NodeMask{1} << i; }
inline bool has_bit(NodeMask m, int i) { return (m >> i) & 1u; }
inline NodeMask full_mask(int n) { return (NodeMask{1} << n) - 1; }

// Calls fn(i) for every set bit.
template <typename F>
inline void for_each_bit(NodeMask m, F&& fn) {
  while (m) {
    int i = lowest_bit(m);
    m &= m - 1;
    fn(i);
  }
}

// Calls fn(sub) for every subset of mask, including 0 and mask itself.
template <typename F>
inline void for_each_subset(NodeMask mask, F&& fn) {
  NodeMask sub = mask;
  for (;;) {
    fn(sub);
    if (sub == 0) break;
    sub = (sub - 1) & mask;
  }
}

// Image of a node set under a relabelling (perm[i] = new label of node i).
inline NodeMask permute_mask(NodeMask m, const int* perm) {
  NodeMask out = 0;
  while (m) {
    int i = lowest_bit(m);
    m &= m - 1;
    out |= bit(perm[i]);
  }
  return out;
}

}  // namespace mdag
