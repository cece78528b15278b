#include "sepctl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "sepctl/errors.hpp"

namespace sepctl {

const char* family_name(Family f) {
  switch (f) {
    case Family::finite: return "finite";
    case Family::gaussian_linear: return "gaussian_linear";
  }
  return "unknown";
}

std::size_t LabeledSpace::index_of(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  require(it != labels.end(), ErrorClass::domain, "unknown label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

double LabeledSpace::value_of(std::size_t i) const {
  require(i < labels.size(), ErrorClass::domain, "value_of: index outside space");
  require(!values.empty(), ErrorClass::invariant, "value_of: space declares no values");
  return values[i];
}

namespace {

void check_space(const LabeledSpace& sp, const char* name, bool needs_values) {
  require(!sp.labels.empty(), ErrorClass::invariant,
          std::string(name) + ": empty space");
  std::unordered_set<std::string> seen;
  for (const auto& l : sp.labels) {
    require(!l.empty(), ErrorClass::invariant, std::string(name) + ": empty label");
    require(l.find_first_not_of(
                "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.-") ==
                std::string::npos,
            ErrorClass::invariant,
            std::string(name) + ": label '" + l + "' has characters outside [A-Za-z0-9_.-]");
    require(seen.insert(l).second, ErrorClass::invariant,
            std::string(name) + ": duplicate label '" + l + "'");
  }
  if (needs_values)
    require(sp.values.size() == sp.labels.size(), ErrorClass::invariant,
            std::string(name) + ": values missing or length mismatch");
  else
    require(sp.values.empty() || sp.values.size() == sp.labels.size(), ErrorClass::invariant,
            std::string(name) + ": values length mismatch");
}

void check_transition(const TransitionTable& tab, const char* name, std::size_t nx,
                      std::size_t nu, std::size_t nw) {
  require(tab.next.size() == nx, ErrorClass::invariant,
          std::string(name) + ": state dimension mismatch");
  for (const auto& per_u : tab.next) {
    require(per_u.size() == nu, ErrorClass::invariant,
            std::string(name) + ": control dimension mismatch");
    for (const auto& per_w : per_u) {
      require(per_w.size() == nw, ErrorClass::invariant,
              std::string(name) + ": disturbance dimension mismatch");
      for (std::size_t x2 : per_w)
        require(x2 < nx, ErrorClass::invariant,
                std::string(name) + ": next state outside state space");
    }
  }
}

}  // namespace

void Scenario::validate() const {
  require(!name.empty(), ErrorClass::invariant, "scenario: empty name");
  require(horizon >= 1, ErrorClass::invariant, "scenario: horizon must be >= 1");
  require(std::isfinite(beta) && beta >= 0.0, ErrorClass::invariant,
          "scenario: beta must be finite and >= 0");
  if (family == Family::finite)
    validate_finite();
  else
    validate_gaussian();
}

void Scenario::validate_finite() const {
  const std::size_t nx = states.size();
  const std::size_t nu = controls.size();
  const std::size_t nw = disturbances.size();
  const std::size_t nz = noises.size();
  const auto T = static_cast<std::size_t>(horizon);

  check_space(states, "states", /*needs_values=*/true);
  check_space(controls, "controls", false);
  check_space(observations, "observations", false);
  check_space(disturbances, "disturbances", false);
  check_space(noises, "noises", false);

  require(model_step.size() == T, ErrorClass::invariant,
          "model dynamics: need one table per step t = 0..T-1");
  require(actual_step.size() == T, ErrorClass::invariant,
          "actual dynamics: need one table per step t = 0..T-1");
  require(observe_map.size() == T + 1, ErrorClass::invariant,
          "observation map: need one table per time t = 0..T");
  for (const auto& tab : model_step) check_transition(tab, "model dynamics", nx, nu, nw);
  for (const auto& tab : actual_step) check_transition(tab, "actual dynamics", nx, nu, nw);
  for (const auto& tab : observe_map) {
    require(tab.out.size() == nx, ErrorClass::invariant,
            "observation map: state dimension mismatch");
    for (const auto& per_z : tab.out) {
      require(per_z.size() == nz, ErrorClass::invariant,
              "observation map: noise dimension mismatch");
      for (std::size_t y : per_z)
        require(y < observations.size(), ErrorClass::invariant,
                "observation map: output outside observation space");
    }
  }

  require(costs.stage.size() == T, ErrorClass::invariant,
          "costs: need one stage table per step t = 0..T-1");
  for (const auto& per_x : costs.stage) {
    require(per_x.size() == nx, ErrorClass::invariant, "costs: state dimension mismatch");
    for (const auto& per_u : per_x) {
      require(per_u.size() == nu, ErrorClass::invariant, "costs: control dimension mismatch");
      for (double c : per_u)
        require(std::isfinite(c), ErrorClass::invariant, "costs: non-finite stage cost");
    }
  }
  require(costs.terminal.size() == nx, ErrorClass::invariant,
          "costs: terminal table dimension mismatch");
  for (double c : costs.terminal)
    require(std::isfinite(c), ErrorClass::invariant, "costs: non-finite terminal cost");

  require(law.initial.has_value(), ErrorClass::invariant, "primitives: initial law missing");
  require(law.initial->support() == states.labels, ErrorClass::invariant,
          "primitives: initial law support must equal the state space");
  require(law.disturbance.size() == T, ErrorClass::invariant,
          "primitives: need one disturbance law per step t = 0..T-1");
  for (const auto& d : law.disturbance)
    require(d.support() == disturbances.labels, ErrorClass::invariant,
            "primitives: disturbance law support mismatch");
  require(law.noise.size() == T + 1, ErrorClass::invariant,
          "primitives: need one noise law per time t = 0..T");
  for (const auto& d : law.noise)
    require(d.support() == noises.labels, ErrorClass::invariant,
            "primitives: noise law support mismatch");
}

void Scenario::validate_gaussian() const {
  const auto T = static_cast<std::size_t>(horizon);
  require(model_lin.size() == T, ErrorClass::invariant,
          "model dynamics: need coefficients per step t = 0..T-1");
  require(actual_lin.size() == T, ErrorClass::invariant,
          "actual dynamics: need coefficients per step t = 0..T-1");
  require(observe_gain.size() == T + 1, ErrorClass::invariant,
          "observation map: need a noise gain per time t = 0..T");
  require(stage_quad.size() == T, ErrorClass::invariant,
          "costs: need quadratic coefficients per step t = 0..T-1");
  for (const auto& q : stage_quad)
    require(std::isfinite(q.q) && std::isfinite(q.r) && q.q >= 0.0 && q.r >= 0.0,
            ErrorClass::invariant, "costs: quadratic weights must be finite and >= 0");
  require(std::isfinite(terminal_quad) && terminal_quad >= 0.0, ErrorClass::invariant,
          "costs: terminal weight must be finite and >= 0");

  auto check_g = [](const Gaussian1D& g, const char* what) {
    require(std::isfinite(g.mean) && std::isfinite(g.variance) && g.variance >= 0.0,
            ErrorClass::invariant, std::string(what) + ": bad Gaussian parameters");
  };
  check_g(law.initial_g, "primitives: initial");
  require(law.disturbance_g.size() == T, ErrorClass::invariant,
          "primitives: need one disturbance law per step t = 0..T-1");
  for (const auto& g : law.disturbance_g) check_g(g, "primitives: disturbance");
  require(law.noise_g.size() == T + 1, ErrorClass::invariant,
          "primitives: need one noise law per time t = 0..T");
  for (const auto& g : law.noise_g) check_g(g, "primitives: noise");

  // Cov(X0, W0) must keep the joint covariance matrix positive semidefinite.
  const double c = law.initial_disturbance_covariance;
  require(std::isfinite(c), ErrorClass::invariant, "primitives: non-finite covariance");
  if (!law.disturbance_g.empty()) {
    const double bound = law.initial_g.variance * law.disturbance_g[0].variance;
    require(c * c <= bound + 1e-12, ErrorClass::invariant,
            "primitives: covariance exceeds Cauchy-Schwarz bound");
  }
}

void Scenario::check_family(Family expected, const char* op) const {
  require(family == expected, ErrorClass::unsupported,
          std::string(op) + ": undefined for family " + family_name(family));
}

void Scenario::check_time(int t, int limit, const char* op) const {
  require(t >= 0 && t < limit, ErrorClass::domain,
          std::string(op) + ": time index " + std::to_string(t) + " outside range");
}

std::size_t Scenario::f_model(int t, std::size_t x, std::size_t u, std::size_t w) const {
  check_family(Family::finite, "f_model");
  check_time(t, horizon, "f_model");
  require(x < n_states() && u < n_controls() && w < disturbances.size(), ErrorClass::domain,
          "f_model: index outside declared space");
  return model_step[static_cast<std::size_t>(t)].next[x][u][w];
}

std::size_t Scenario::f_actual(int t, std::size_t x, std::size_t u, std::size_t w) const {
  check_family(Family::finite, "f_actual");
  check_time(t, horizon, "f_actual");
  require(x < n_states() && u < n_controls() && w < disturbances.size(), ErrorClass::domain,
          "f_actual: index outside declared space");
  return actual_step[static_cast<std::size_t>(t)].next[x][u][w];
}

std::size_t Scenario::h_observe(int t, std::size_t x, std::size_t z) const {
  check_family(Family::finite, "h_observe");
  check_time(t, horizon + 1, "h_observe");
  require(x < n_states() && z < noises.size(), ErrorClass::domain,
          "h_observe: index outside declared space");
  return observe_map[static_cast<std::size_t>(t)].out[x][z];
}

double Scenario::stage_cost(int t, std::size_t x, std::size_t u) const {
  check_family(Family::finite, "stage_cost");
  check_time(t, horizon, "stage_cost");
  require(x < n_states() && u < n_controls(), ErrorClass::domain,
          "stage_cost: index outside declared space");
  return costs.stage[static_cast<std::size_t>(t)][x][u];
}

double Scenario::terminal_cost(std::size_t x) const {
  check_family(Family::finite, "terminal_cost");
  require(x < n_states(), ErrorClass::domain, "terminal_cost: index outside declared space");
  return costs.terminal[x];
}

double Scenario::state_value(std::size_t x) const {
  check_family(Family::finite, "state_value");
  return states.value_of(x);
}

double Scenario::f_model_lin(int t, double x, double u, double w) const {
  check_family(Family::gaussian_linear, "f_model_lin");
  check_time(t, horizon, "f_model_lin");
  const auto& s = model_lin[static_cast<std::size_t>(t)];
  return s.a * x + s.b * u + s.c * w;
}

double Scenario::f_actual_lin(int t, double x, double u, double w) const {
  check_family(Family::gaussian_linear, "f_actual_lin");
  check_time(t, horizon, "f_actual_lin");
  const auto& s = actual_lin[static_cast<std::size_t>(t)];
  return s.a * x + s.b * u + s.c * w;
}

double Scenario::h_observe_lin(int t, double x, double z) const {
  check_family(Family::gaussian_linear, "h_observe_lin");
  check_time(t, horizon + 1, "h_observe_lin");
  return x + observe_gain[static_cast<std::size_t>(t)] * z;
}

double Scenario::stage_cost_lin(int t, double x, double u) const {
  check_family(Family::gaussian_linear, "stage_cost_lin");
  check_time(t, horizon, "stage_cost_lin");
  const auto& q = stage_quad[static_cast<std::size_t>(t)];
  return q.q * x * x + q.r * u * u;
}

double Scenario::terminal_cost_lin(double x) const {
  check_family(Family::gaussian_linear, "terminal_cost_lin");
  return terminal_quad * x * x;
}

LinearStep ModelView::model_lin_step(int t) const {
  s_->f_model_lin(t, 0.0, 0.0, 0.0);  // family and range checks
  return s_->model_lin[static_cast<std::size_t>(t)];
}

double mismatch_penalty(const Scenario& s, std::size_t x, std::size_t x_hat) {
  const double d = s.state_value(x) - s.state_value(x_hat);
  return s.beta * d * d;
}

double mismatch_penalty_lin(const Scenario& s, double x, double x_hat) {
  const double d = x - x_hat;
  return s.beta * d * d;
}

double cost(const Scenario& s, int t, std::size_t x, std::optional<std::size_t> u) {
  if (t == s.horizon) {
    require(!u.has_value(), ErrorClass::usage, "cost: control supplied at the terminal time");
    return s.terminal_cost(x);
  }
  require(u.has_value(), ErrorClass::usage, "cost: control required before the terminal time");
  return s.stage_cost(t, x, *u);
}

double cost_lin(const Scenario& s, int t, double x, std::optional<double> u) {
  if (t == s.horizon) {
    require(!u.has_value(), ErrorClass::usage, "cost: control supplied at the terminal time");
    return s.terminal_cost_lin(x);
  }
  require(u.has_value(), ErrorClass::usage, "cost: control required before the terminal time");
  return s.stage_cost_lin(t, x, *u);
}

}  // namespace sepctl
