#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sepctl/scenario.hpp"
#include "sepctl/strategy.hpp"

namespace sepctl::harness {

// Everything available at decision time t in a finite-family rollout.  The
// history fields are the legitimate controller inputs; the realized-state
// fields (x, x_hat, w) are privileged instrumentation for reference/audit
// controllers such as MatchingController, which by construction must see both
// systems.  Strategy controllers must not read them.
struct FiniteStep {
  int t;
  const std::vector<std::size_t>& y_history;      // model-side y_0..y_t
  const std::vector<std::size_t>& y_hat_history;  // actual-side y_0..y_t
  const std::vector<std::size_t>& u_history;      // u_0..u_{t-1}
  std::size_t x;      // privileged: realized model state
  std::size_t x_hat;  // privileged: realized actual state
  std::size_t w;      // privileged: realized shared disturbance
};

// Gaussian-family analogue of FiniteStep.
struct RealStep {
  int t;
  const std::vector<double>& y_history;
  const std::vector<double>& y_hat_history;
  const std::vector<double>& u_history;
  double x;      // privileged
  double x_hat;  // privileged
  double w;      // privileged
};

// Emits one control per decision epoch as a pure function of the step view,
// so a single instance can serve concurrent rollouts.  A controller
// implements the overload matching its scenario family; the other defaults
// to an unsupported-representation error.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::size_t decide(const FiniteStep& step) const;
  virtual double decide(const RealStep& step) const;
  virtual std::string id() const = 0;  // stable label for run-log headers
};

// Plays a fixed observation-history-measurable strategy (finite family).
class StrategyController : public Controller {
 public:
  StrategyController(DeterministicStrategy strategy, std::size_t n_observations, std::string id);
  std::size_t decide(const FiniteStep& step) const override;
  std::string id() const override { return id_; }

 private:
  DeterministicStrategy strategy_;
  std::size_t n_observations_;
  std::string id_;
};

// Reference controller that forces the model's next state onto the actual
// system's: u_t = (a_hat*x_hat - a*x + (c_hat - c)*w) / (b - b_hat), the
// closed-loop fixed point of matching both arrival states under the shared
// control and disturbance.  Gaussian family only; requires distinct control
// coefficients at every step.  Reads the privileged step fields by design.
class MatchingController : public Controller {
 public:
  explicit MatchingController(const Scenario& s);
  double decide(const RealStep& step) const override;
  std::string id() const override { return "matching"; }

 private:
  std::vector<LinearStep> model_;
  std::vector<LinearStep> actual_;
};

// Horizon-2 gaussian-family linear strategy on the actual-side observations:
// u_0 = a*y_hat_0, u_1 = b*y_hat_1 + c*y_hat_0.
class LinearController : public Controller {
 public:
  LinearController(double a, double b, double c, std::string id = "linear");
  double decide(const RealStep& step) const override;
  std::string id() const override { return id_; }

 private:
  double a_, b_, c_;
  std::string id_;
};

// One realized parallel rollout: both systems driven by the same initial
// state, disturbances, noises, and controls.  Exactly one of the index/real
// column sets is populated, by family.  penalty[t] is the mismatch penalty
// charged on arrival at t (so penalty[0] = 0); the realized Problem-1
// objective is total_actual_cost() and the realized Problem-2 objective is
// total_penalized_cost().
struct Trajectory {
  Family family = Family::finite;
  int horizon = 0;

  // finite family: indices into the scenario's labeled spaces
  std::vector<std::size_t> x, x_hat, y, y_hat, z;  // t = 0..T
  std::vector<std::size_t> u, w;                   // t = 0..T-1

  // gaussian_linear family
  std::vector<double> x_real, x_hat_real, y_real, y_hat_real, z_real;
  std::vector<double> u_real, w_real;

  std::vector<double> model_cost;   // per t = 0..T (stage costs, then terminal)
  std::vector<double> actual_cost;  // per t = 0..T
  std::vector<double> penalty;      // per t = 0..T

  double total_model_cost() const;
  double total_actual_cost() const;
  double total_penalized_cost() const;  // model cost + penalties
};

// One rollout: samples one primitive realization from the seed, then steps
// the model and the actual system with the SAME disturbance w_t and the SAME
// control u_t, recording both observation streams.  Deterministic given
// (scenario, controller, seed).  Errors (domain) if the controller emits a
// control outside the declared space.
Trajectory run_parallel(const Scenario& s, const Controller& controller, std::uint64_t seed);

// Sample means of the realized Problem-1 objective (actual-system cost) and
// the realized Problem-2 objective (model cost plus mismatch penalties) over
// n rollouts, with standard errors.  Rollout i draws from the substream
// (seed, i), so the estimate is deterministic given the seed and independent
// of execution order; rollouts run concurrently for large n.
struct CostEstimate {
  double actual_cost_mean = 0.0;
  double actual_cost_se = 0.0;
  double penalized_cost_mean = 0.0;
  double penalized_cost_se = 0.0;
  std::size_t rollouts = 0;
};
CostEstimate monte_carlo_cost(const Scenario& s, const Controller& controller, std::size_t n,
                              std::uint64_t seed);

// Per-rollout check of the cost-transfer property: if the two state paths
// coincide at every step, the realized model-side and actual-side total costs
// must agree (within 1e-9).  "Coincide" is judged at 1e-9 because exact zero
// is generally unattainable in floating point even under a matching control.
struct AuditReport {
  std::vector<double> state_gap;  // |value(x_t) - value(x_hat_t)| per t = 0..T
  double max_state_gap = 0.0;
  double total_model_cost = 0.0;
  double total_actual_cost = 0.0;
  bool matched = false;        // every state gap <= 1e-9
  bool costs_equal = false;    // |model - actual| <= 1e-9
  bool transfer_holds = false; // matched implies costs_equal
};
AuditReport audit_cost_transfer(const Scenario& s, const Trajectory& trajectory);

// A batch of rollouts plus the summary statistics recomputed from them.
struct RunLog {
  std::uint64_t scenario_hash = 0;
  std::string strategy_id;
  std::uint64_t seed = 0;
  double beta = 0.0;
  std::vector<Trajectory> rollouts;
  double mean_actual_cost = 0.0;
  double mean_penalized_cost = 0.0;
  std::vector<double> mean_penalty_per_step;  // t = 0..T
};
RunLog collect_run_log(const Scenario& s, const Controller& controller, std::size_t n,
                       std::uint64_t seed);

// Comma-separated artifact: header (tool version, scenario hash, strategy id,
// seed, beta), one row per (rollout, t) with columns
// rollout,t,x,x_hat,y,y_hat,u,w,z,c_model,c_actual,penalty (u and w blank at
// t = T), then a summary block.  The column order is a compatibility
// contract; identical inputs produce byte-identical output.
std::string serialize_run_log(const Scenario& s, const RunLog& log);

}  // namespace sepctl::harness
