#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sepctl/distribution.hpp"

namespace sepctl {

enum class Family {
  finite,           // tabular spaces, dynamics, observation maps, costs
  gaussian_linear,  // scalar linear dynamics, quadratic costs, Gaussian primitives
};

const char* family_name(Family f);

// Ordered labels with an optional numeric value per element (used by the
// model-mismatch penalty and by run logs).  `values` is either empty or the
// same length as `labels`.
struct LabeledSpace {
  std::vector<std::string> labels;
  std::vector<double> values;

  std::size_t size() const { return labels.size(); }
  std::size_t index_of(const std::string& label) const;
  double value_of(std::size_t i) const;
};

// next[x][u][w] -> state index, for one time step.
struct TransitionTable {
  std::vector<std::vector<std::vector<std::size_t>>> next;
};

// out[x][z] -> observation index, for one time step.
struct ObservationTable {
  std::vector<std::vector<std::size_t>> out;
};

// stage[t][x][u] plus terminal[x].
struct FiniteCosts {
  std::vector<std::vector<std::vector<double>>> stage;
  std::vector<double> terminal;
};

// x_{t+1} = a*x_t + b*u_t + c*w_t (one step of a scalar linear system).
struct LinearStep {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Scalar quadratic stage cost q*x^2 + r*u^2.
struct QuadCost {
  double q = 0.0;
  double r = 0.0;
};

// Joint law of the primitive randomness (X0, W_{0:T-1}, Z_{0:T}).  Everything
// here is declared up front and is legitimately known to the solver; only the
// dynamics that consume it are split between model and design.
struct PrimitiveLaw {
  // finite family
  std::optional<Distribution> initial;          // over states
  std::vector<Distribution> disturbance;        // per t = 0..T-1, over disturbances
  std::vector<Distribution> noise;              // per t = 0..T, over noises

  // gaussian_linear family
  Gaussian1D initial_g;                         // X0
  std::vector<Gaussian1D> disturbance_g;        // per t = 0..T-1
  std::vector<Gaussian1D> noise_g;              // per t = 0..T
  double initial_disturbance_covariance = 0.0;  // Cov(X0, W0)
};

// A complete control problem: one declared stochastic model used for design,
// one actual system the controls are applied to, a shared observation channel,
// shared primitive randomness, costs, and the mismatch penalty weight.
class Scenario {
 public:
  std::string name;
  Family family = Family::finite;
  int horizon = 0;      // T >= 1; controls exist for t = 0..T-1
  double beta = 0.0;    // mismatch penalty weight

  // finite family
  LabeledSpace states, controls, observations, disturbances, noises;
  std::vector<TransitionTable> model_step;    // per t = 0..T-1
  std::vector<TransitionTable> actual_step;   // per t = 0..T-1
  std::vector<ObservationTable> observe_map;  // per t = 0..T
  FiniteCosts costs;

  // gaussian_linear family (observation is y = x + d*z per step)
  std::vector<LinearStep> model_lin;    // per t = 0..T-1
  std::vector<LinearStep> actual_lin;   // per t = 0..T-1
  std::vector<double> observe_gain;     // d per t = 0..T
  std::vector<QuadCost> stage_quad;     // per t = 0..T-1
  double terminal_quad = 0.0;           // q_T

  PrimitiveLaw law;

  // Optional documented solution for this scenario: control coefficients on
  // the initial state, reported alongside solver output for comparison.
  std::vector<double> reference_coefficients;

  // Validates every structural invariant for the declared family; errors name
  // the violated invariant.
  void validate() const;

  // --- finite-family evaluation (indices into the labeled spaces) ---
  std::size_t n_states() const { return states.size(); }
  std::size_t n_controls() const { return controls.size(); }
  std::size_t n_observations() const { return observations.size(); }
  std::size_t f_model(int t, std::size_t x, std::size_t u, std::size_t w) const;
  std::size_t f_actual(int t, std::size_t x, std::size_t u, std::size_t w) const;
  std::size_t h_observe(int t, std::size_t x, std::size_t z) const;
  double stage_cost(int t, std::size_t x, std::size_t u) const;
  double terminal_cost(std::size_t x) const;
  double state_value(std::size_t x) const;  // numeric value entering the penalty

  // --- gaussian_linear-family evaluation ---
  double f_model_lin(int t, double x, double u, double w) const;
  double f_actual_lin(int t, double x, double u, double w) const;
  double h_observe_lin(int t, double x, double z) const;
  double stage_cost_lin(int t, double x, double u) const;
  double terminal_cost_lin(double x) const;

 private:
  void validate_finite() const;
  void validate_gaussian() const;
  void check_family(Family expected, const char* op) const;
  void check_time(int t, int limit, const char* op) const;
};

// Squared-difference mismatch penalty beta * (value(x) - value(x_hat))^2
// charged on the pair of arrival states.
double mismatch_penalty(const Scenario& s, std::size_t x, std::size_t x_hat);
double mismatch_penalty_lin(const Scenario& s, double x, double x_hat);

// Stage or terminal cost of the declared model: pass a control for t < T and
// no control at t = T.  Errors if the control is present/absent on the wrong
// side of the horizon.
double cost(const Scenario& s, int t, std::size_t x, std::optional<std::size_t> u);
double cost_lin(const Scenario& s, int t, double x, std::optional<double> u);

// Solver-facing view of a scenario.  Exposes spaces, the declared model
// dynamics, the observation channel, costs, and the primitive law — but no
// accessor for the actual-system dynamics.  Design code takes this view;
// anything touching f_actual must take the full Scenario and say so.
class ModelView {
 public:
  ModelView(const Scenario& s) : s_(&s) {}  // NOLINT: implicit by design

  const std::string& name() const { return s_->name; }
  Family family() const { return s_->family; }
  int horizon() const { return s_->horizon; }
  double beta() const { return s_->beta; }

  const LabeledSpace& states() const { return s_->states; }
  const LabeledSpace& controls() const { return s_->controls; }
  const LabeledSpace& observations() const { return s_->observations; }
  const LabeledSpace& disturbances() const { return s_->disturbances; }
  const LabeledSpace& noises() const { return s_->noises; }
  const PrimitiveLaw& law() const { return s_->law; }

  std::size_t n_states() const { return s_->n_states(); }
  std::size_t n_controls() const { return s_->n_controls(); }
  std::size_t n_observations() const { return s_->n_observations(); }

  std::size_t f_model(int t, std::size_t x, std::size_t u, std::size_t w) const {
    return s_->f_model(t, x, u, w);
  }
  std::size_t h_observe(int t, std::size_t x, std::size_t z) const {
    return s_->h_observe(t, x, z);
  }
  double stage_cost(int t, std::size_t x, std::size_t u) const { return s_->stage_cost(t, x, u); }
  double terminal_cost(std::size_t x) const { return s_->terminal_cost(x); }
  double state_value(std::size_t x) const { return s_->state_value(x); }

  double f_model_lin(int t, double x, double u, double w) const {
    return s_->f_model_lin(t, x, u, w);
  }
  double h_observe_lin(int t, double x, double z) const { return s_->h_observe_lin(t, x, z); }
  double stage_cost_lin(int t, double x, double u) const { return s_->stage_cost_lin(t, x, u); }
  double terminal_cost_lin(double x) const { return s_->terminal_cost_lin(x); }
  LinearStep model_lin_step(int t) const;

 private:
  const Scenario* s_;
};

}  // namespace sepctl
