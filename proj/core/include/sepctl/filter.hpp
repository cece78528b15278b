#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sepctl/distribution.hpp"
#include "sepctl/scenario.hpp"
#include "sepctl/strategy.hpp"

namespace sepctl::filter {

// Joint conditional distribution of (model state, actual state) given the
// model-side observation history and applied controls.  Pairs are stored
// model-state major: entry x * n + x_hat.
class InformationState {
 public:
  InformationState(int t, std::size_t n_states, std::vector<double> joint);

  int t() const { return t_; }
  std::size_t n_states() const { return n_; }
  const std::vector<double>& joint() const { return joint_; }
  double at(std::size_t x, std::size_t x_hat) const;

  Distribution model_marginal(const LabeledSpace& states) const;
  Distribution actual_marginal(const LabeledSpace& states) const;
  std::size_t actual_mode() const;  // ties resolve to the lowest state index

  double l1_distance(const InformationState& other) const;
  double max_abs_difference(const InformationState& other) const;

 private:
  int t_;
  std::size_t n_;
  std::vector<double> joint_;
};

// One-step transition law of a single system: prob[t][u][x][x'].
class MarkovKernel {
 public:
  // Marginalizes the declared model dynamics over the disturbance law.
  static MarkovKernel model(const ModelView& view);
  // Ground-truth kernel of the actual system; the only MarkovKernel factory
  // that reads actual dynamics, used by oracles and audits.  Online use
  // substitutes a learned kernel with the same shape.
  static MarkovKernel actual_exact(const Scenario& s);

  double prob(int t, std::size_t u, std::size_t x, std::size_t x_next) const;
  int horizon() const { return static_cast<int>(prob_.size()); }
  std::size_t n_states() const { return n_; }

  MarkovKernel() = default;
  MarkovKernel(std::size_t n_states,
               std::vector<std::vector<std::vector<std::vector<double>>>> prob);

 private:
  std::size_t n_ = 0;
  // [t][u][x][x']
  std::vector<std::vector<std::vector<std::vector<double>>>> prob_;
};

// One-step transition law of the coupled pair (x, x_hat) under a shared
// control and SHARED disturbance: prob[t][u][pair][pair'].  This coupling is
// what distinguishes the joint filter from two independent marginals.
class JointKernel {
 public:
  static JointKernel exact(const Scenario& s);

  double prob(int t, std::size_t u, std::size_t pair, std::size_t pair_next) const;
  double prob(int t, std::size_t u, std::size_t x, std::size_t x_hat, std::size_t x_next,
              std::size_t x_hat_next) const;
  int horizon() const { return static_cast<int>(prob_.size()); }
  std::size_t n_states() const { return n_; }

  JointKernel() = default;
  JointKernel(std::size_t n_states,
              std::vector<std::vector<std::vector<std::vector<double>>>> prob);

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<std::vector<std::vector<double>>>> prob_;
};

// p(y | state at time t): the observation map marginalized over the noise
// law.  Depends on nothing but (t, y, x) — no history, no strategy.
double observation_likelihood(const ModelView& view, int t, std::size_t y, std::size_t x);

// Free-function form of the joint one-step law (builds on the full scenario).
double joint_transition(const Scenario& s, int t, std::size_t u, std::size_t x,
                        std::size_t x_hat, std::size_t x_next, std::size_t x_hat_next);

// Information state at t = 0: both systems start in the shared initial state
// (diagonal prior), corrected by the first observation.
InformationState initial_information_state(const ModelView& view, std::size_t y0);

// One filtering step: predict with the joint kernel under u_t, correct with
// the likelihood of y_{t+1} on the model coordinate, renormalize.  Errors
// (impossible-observation) if y_{t+1} has zero predictive mass.
InformationState phi_update(const ModelView& view, const JointKernel& kernel,
                            const InformationState& pi, std::size_t y_next, std::size_t u);
InformationState phi_update(const Scenario& s, const InformationState& pi, std::size_t y_next,
                            std::size_t u);

// Single-system belief recursions (the marginal analogues of phi_update).
// theta_update follows the declared model; theta_hat_update follows whatever
// actual-system kernel the caller supplies — the true one is not available
// online, so this argument is typically a learned estimate.
Distribution theta_update(const ModelView& view, const Distribution& belief, int t,
                          std::size_t y_next, std::size_t u);
Distribution theta_hat_update(const ModelView& view, const MarkovKernel& actual_kernel,
                              const Distribution& belief, int t, std::size_t y_hat_next,
                              std::size_t u);

// Assembles the joint from its factor form: the model-side belief, one
// actual-side belief per actual-observation history, and the conditional
// weight of each history given the applied controls.
InformationState factorize(int t, const Distribution& model_belief,
                           const std::vector<Distribution>& actual_belief_by_history,
                           const std::vector<double>& obs_history_weight);

// Exhaustively checks that the conditional joint p(x_t, x_hat_t | y-history,
// u-history) agrees between two strategies on every history reachable with
// positive probability under both.
struct IndependenceReport {
  double max_discrepancy = 0.0;
  std::size_t histories_compared = 0;
  bool vacuous = false;  // no shared reachable history
};
IndependenceReport verify_policy_independence(const Scenario& s,
                                              const DeterministicStrategy& strategy_a,
                                              const DeterministicStrategy& strategy_b);

}  // namespace sepctl::filter
