#pragma once

#include <cstdint>
#include <string>

#include "sepctl/scenario.hpp"

namespace sepctl::scenarios {

// Two-state, two-control, horizon-2 tabular problem whose model and actual
// dynamics differ in exactly one table entry.  Small enough that every
// consistency check in the library can be run against exhaustive enumeration.
Scenario builtin_discrete_toy();

// Horizon-2 scalar linear-quadratic problem with correlated initial state and
// first disturbance, noiseless identity observations, and a deliberately
// different actual system; carries a documented reference solution.
Scenario builtin_lqg();

// Returns the builtin with the given id ("discrete_toy" or "lqg");
// errors (usage) on unknown ids.
Scenario builtin(const std::string& id);

// Parses the text scenario format (see README).  Errors carry the input name
// and 1-based line number; the parsed scenario is fully validated.
Scenario parse(const std::string& text, const std::string& input_name);
Scenario load_file(const std::string& path);

// Canonical text form: fixed section order, explicit time indices, numbers in
// round-trip-exact decimal form.  parse(serialize(s)) reproduces s exactly.
std::string serialize(const Scenario& s);

// FNV-1a over the canonical text form; stamps artifacts so any output can be
// traced to the exact scenario that produced it.
std::uint64_t scenario_hash(const Scenario& s);
std::string scenario_hash_hex(const Scenario& s);

}  // namespace sepctl::scenarios
