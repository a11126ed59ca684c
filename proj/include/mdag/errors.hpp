#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mdag {

struct CycleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct NotLatentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DisjointnessError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SizeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};
struct ArityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};
struct NoPartnerError : std::logic_error {
  using std::logic_error::logic_error;
};
struct MissingStoreError : std::logic_error {
  using std::logic_error::logic_error;
};
struct CapError : std::length_error {
  using std::length_error::length_error;
};
struct CacheCorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a search exceeds its deterministic node budget.
struct TimeoutError : std::runtime_error {
  std::uint64_t explored = 0;
  explicit TimeoutError(std::uint64_t nodes)
      : std::runtime_error("search budget exhausted after " + std::to_string(nodes) + " nodes"),
        explored(nodes) {}
};

}  // namespace mdag
