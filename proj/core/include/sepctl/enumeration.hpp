#pragma once

#include <cstddef>
#include <vector>

#include "sepctl/scenario.hpp"
#include "sepctl/strategy.hpp"

namespace sepctl {

// One realization of all primitive randomness of a finite scenario, with its
// probability.  Atoms with zero probability are not emitted.
struct Atom {
  std::size_t x0;
  std::vector<std::size_t> w;  // t = 0..T-1
  std::vector<std::size_t> z;  // t = 0..T
  double prob;
};

// Every positive-probability primitive realization.  Errors (too-large) if
// the full product space exceeds 10^6 outcomes.
std::vector<Atom> enumerate_atoms(const Scenario& s);

// Closed-loop evolution of both systems on one atom under a deterministic
// strategy driven by the model-side observations.
struct ClosedLoopTrace {
  std::vector<std::size_t> x, x_hat;  // t = 0..T
  std::vector<std::size_t> y, y_hat;  // t = 0..T
  std::vector<std::size_t> u;         // t = 0..T-1
};
ClosedLoopTrace closed_loop_trace(const Scenario& s, const DeterministicStrategy& strategy,
                                  const Atom& atom);

// Exact Problem-objective costs of one traced rollout.
double trace_model_cost(const Scenario& s, const ClosedLoopTrace& trace);      // stage + terminal, model states
double trace_actual_cost(const Scenario& s, const ClosedLoopTrace& trace);     // stage + terminal, actual states
double trace_penalized_cost(const Scenario& s, const ClosedLoopTrace& trace);  // model cost + mismatch penalties

}  // namespace sepctl
