#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepctl/filter.hpp"
#include "sepctl/scenario.hpp"
#include "sepctl/strategy.hpp"

namespace sepctl::solver {

// Finite set of representative information states per time step, with L1
// nearest-neighbor projection.  Two constructions: the exact set of beliefs
// reachable from the initial law (no projection error), and a uniform
// simplex lattice of a chosen resolution.
class BeliefGrid {
 public:
  struct Projection {
    std::size_t index;
    double l1_distance;
  };

  // Enumerates every reachable belief by forward search over (u, y); exact
  // for small finite scenarios.
  static BeliefGrid exact_reachable(const ModelView& view, const filter::JointKernel& kernel);
  // All joint tables with masses that are multiples of 1/resolution, shared
  // across time steps.
  static BeliefGrid uniform(const ModelView& view, std::size_t resolution);

  // Nearest representative at time t by L1 distance; ties resolve to the
  // lowest index.  Errors (resolution) if the distance exceeds delta.
  Projection project(const filter::InformationState& pi) const;

  const std::vector<filter::InformationState>& points(int t) const;
  double delta() const { return delta_; }
  int horizon() const { return static_cast<int>(points_.size()) - 1; }

 private:
  std::vector<std::vector<filter::InformationState>> points_;  // per t = 0..T
  double delta_ = 0.0;  // declared covering resolution (projection error bound)
};

// V_t over (grid point, actual-realization parameter).  Slices over the
// parameter coincide numerically whenever the recursion conditions on the
// full joint belief (the belief already carries the actual-state
// uncertainty); the axis is kept so strategies remain parameterized by the
// actual-state realization.  V_T depends on the belief alone.
struct ValueFunction {
  std::vector<std::vector<std::vector<double>>> value;  // [t][grid][x_hat], t = 0..T-1
  std::vector<double> terminal;                         // [grid] at t = T
};

// Offline product of dp_solve: per (time, grid point, actual-realization
// parameter) control choice plus provenance.
struct SeparatedStrategy {
  std::vector<std::vector<std::vector<std::size_t>>> action;  // [t][grid][x_hat]
  bool grid_based = true;      // false for closed-form parametric strategies
  std::uint64_t scenario_hash = 0;
  double grid_delta = 0.0;
  double beta = 0.0;
};

struct DpResult {
  ValueFunction value;
  SeparatedStrategy strategy;
};

// c_t(x, u) + beta * |value(x_next) - value(x_hat_next)|^2.
double penalized_stage_cost(const ModelView& view, int t, std::size_t x, std::size_t u,
                            std::size_t x_next, std::size_t x_hat_next);
double penalized_stage_cost_lin(const ModelView& view, int t, double x, double u, double x_next,
                                double x_hat_next);

// Backward recursion over the belief grid: V_T(pi) = E[c_T | pi], and
// V_t(pi; x_hat) = min_u E[penalized stage cost + V_{t+1}(projection of the
// filter update; x_hat_{t+1})], the expectation running over the belief, the
// shared disturbance, and the next observation.  Argmin ties resolve to the
// lowest control index.  The kernel argument carries everything the solver
// may know about the coupled pair; the view carries no actual dynamics.
DpResult dp_solve(const ModelView& view, const filter::JointKernel& kernel,
                  const BeliefGrid& grid, std::uint64_t scenario_hash);
DpResult dp_solve(const Scenario& s, const BeliefGrid& grid);

// Closed-loop expected value before the first observation arrives:
// sum over y_0 of p(y_0) * V_0(projection of the corrected initial belief),
// with the actual-realization slice chosen the same way execution chooses it
// (actual-marginal mode).  This is the number comparable to an exhaustive
// strategy search.
double expected_initial_value(const ModelView& view, const BeliefGrid& grid,
                              const ValueFunction& vf);

// Exact minimum over every observation-history-measurable deterministic
// strategy, by full enumeration of strategies and primitive realizations.
struct OracleResult {
  double min_cost = 0.0;
  std::uint64_t best_ordinal = 0;
  DeterministicStrategy best_strategy;
  std::uint64_t strategies_enumerated = 0;
  std::vector<double> all_costs;  // cost per ordinal
};
OracleResult exhaustive_oracle(const Scenario& s);

// The control forcing the model's next state to a given actual-realization
// target: u = (target - a*x - c*w) / b.  Errors (unsupported) when the
// control coefficient is zero.
double matching_control(const ModelView& view, int t, double x, double w, double x_hat_target);

// Value/strategy tables in the versioned artifact format (header carries the
// scenario hash, grid resolution, and penalty weight).
std::string serialize_tables(const ModelView& view, const DpResult& result);

// ---------------------------------------------------------------------------
// Scalar linear-quadratic path (horizon-2 Gaussian family)

// Exact expectation of the actual-system quadratic cost under the linear
// strategy u_0 = a*x_0, u_1 = b*x_hat_1 + c*x_0, evaluated from the declared
// second moments.
double lqg_exact_actual_cost(const Scenario& s, double a, double b, double c);

struct LqgSearchResult {
  double a = 0.0, b = 0.0, c = 0.0;
  double cost = 0.0;
};
// Brute-force minimization of lqg_exact_actual_cost over a, b, c in
// [-3, 3], coarse step 0.01 refined to 1e-4.
LqgSearchResult lqg_grid_search_oracle(const Scenario& s);

// The stagewise reduction: substitute the matching control, drop zero-mean
// disturbance terms, and set each stage's derivative to zero.  Returns the
// procedure's own outputs alongside the scenario's documented reference
// solution and the independent grid-search oracle, so callers can report all
// three side by side.
struct LqgReport {
  // Matched first-stage control u_0 = px*x_0 + pw*w_0 (exact fixed point of
  // forcing the model's next state onto the actual system's).
  double matched_u0_state_coeff = 0.0;       // px
  double matched_u0_disturbance_coeff = 0.0; // pw
  bool first_stage_condition_vacuous = false;  // stationarity is 0=0 under zero means
  // Second-stage stationarity yields u_1 = k * x_hat_1; reducing x_hat_1 onto
  // x_0 (disturbance dropped as zero-mean) gives an x_0 coefficient that
  // depends on which u_0 is substituted.
  double stationary_u1_coeff = 0.0;           // k
  double derived_u1_from_reference_u0 = 0.0;  // k*(a_hat + b_hat*ref_a); NaN without a reference
  double derived_u1_from_matched_u0 = 0.0;    // k*(a_hat + b_hat*px)
  // Reference solution recorded in the scenario (empty if none).
  std::vector<double> reference_coefficients;
  double reference_cost = 0.0;  // exact cost of (ref_a, 0, ref_c); NaN without a reference
  LqgSearchResult oracle;
};
LqgReport lqg_stagewise_solve(const Scenario& s);

// Human/machine-readable rendering of the dual report (comma-separated rows).
std::string serialize_lqg_report(const Scenario& s, const LqgReport& report);

}  // namespace sepctl::solver
