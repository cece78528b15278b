#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sepctl/scenario.hpp"

namespace sepctl {

// Encodes an observation history (y_0, ..., y_t) as a single index in
// [0, n_obs^(t+1)): earliest observation in the lowest digit.
std::size_t history_code(std::span<const std::size_t> history, std::size_t n_obs);
std::vector<std::size_t> decode_history(std::size_t code, std::size_t length, std::size_t n_obs);

// A deterministic control strategy for a finite scenario: at each t < T the
// control is a function of the full observation history (y_0, ..., y_t).
// Tables are flat over history codes, so the whole (finite) strategy class
// can be enumerated by ordinal.
struct DeterministicStrategy {
  std::vector<std::vector<std::size_t>> table;  // table[t][history_code] -> control

  std::size_t decide(int t, std::span<const std::size_t> y_history, std::size_t n_obs) const;

  // Number of distinct strategies for this scenario's spaces and horizon.
  // Errors (too-large) above 10^6 so callers cannot silently start an
  // infeasible enumeration.
  static std::uint64_t count(const ModelView& view);

  // The k-th strategy in a fixed total order (lexicographic over table
  // entries, earliest time and lowest history code most significant).
  static DeterministicStrategy from_ordinal(const ModelView& view, std::uint64_t k);
};

}  // namespace sepctl
