#include "sepctl/filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "sepctl/enumeration.hpp"
#include "sepctl/errors.hpp"

namespace sepctl::filter {

namespace {
constexpr double kMassTolerance = 1e-9;
}

InformationState::InformationState(int t, std::size_t n_states, std::vector<double> joint)
    : t_(t), n_(n_states), joint_(std::move(joint)) {
  require(t_ >= 0, ErrorClass::domain, "information state: negative time");
  require(n_ > 0 && joint_.size() == n_ * n_, ErrorClass::invariant,
          "information state: joint table must have n_states^2 entries");
  double total = 0.0;
  for (double m : joint_) {
    require(std::isfinite(m) && m >= 0.0, ErrorClass::invariant,
            "information state: masses must be finite and nonnegative");
    total += m;
  }
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorClass::invariant,
          "information state: normalization (total mass " + std::to_string(total) + ")");
}

double InformationState::at(std::size_t x, std::size_t x_hat) const {
  require(x < n_ && x_hat < n_, ErrorClass::domain, "information state: index outside space");
  return joint_[x * n_ + x_hat];
}

Distribution InformationState::model_marginal(const LabeledSpace& states) const {
  require(states.size() == n_, ErrorClass::domain, "model_marginal: space size mismatch");
  std::vector<double> mass(n_, 0.0);
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t xh = 0; xh < n_; ++xh) mass[x] += joint_[x * n_ + xh];
  return Distribution(states.labels, std::move(mass));
}

Distribution InformationState::actual_marginal(const LabeledSpace& states) const {
  require(states.size() == n_, ErrorClass::domain, "actual_marginal: space size mismatch");
  std::vector<double> mass(n_, 0.0);
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t xh = 0; xh < n_; ++xh) mass[xh] += joint_[x * n_ + xh];
  return Distribution(states.labels, std::move(mass));
}

std::size_t InformationState::actual_mode() const {
  std::vector<double> mass(n_, 0.0);
  for (std::size_t x = 0; x < n_; ++x)
    for (std::size_t xh = 0; xh < n_; ++xh) mass[xh] += joint_[x * n_ + xh];
  std::size_t best = 0;
  for (std::size_t i = 1; i < n_; ++i)
    if (mass[i] > mass[best]) best = i;
  return best;
}

double InformationState::l1_distance(const InformationState& other) const {
  require(n_ == other.n_, ErrorClass::domain, "l1_distance: space size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < joint_.size(); ++i) d += std::abs(joint_[i] - other.joint_[i]);
  return d;
}

double InformationState::max_abs_difference(const InformationState& other) const {
  require(n_ == other.n_, ErrorClass::domain, "max_abs_difference: space size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < joint_.size(); ++i)
    d = std::max(d, std::abs(joint_[i] - other.joint_[i]));
  return d;
}

// ---------------------------------------------------------------------------
// Kernels

MarkovKernel::MarkovKernel(std::size_t n_states,
                           std::vector<std::vector<std::vector<std::vector<double>>>> prob)
    : n_(n_states), prob_(std::move(prob)) {}

MarkovKernel MarkovKernel::model(const ModelView& view) {
  require(view.family() == Family::finite, ErrorClass::unsupported,
          "MarkovKernel: finite family only");
  const std::size_t n = view.n_states();
  const std::size_t nu = view.n_controls();
  const std::size_t nw = view.disturbances().size();
  std::vector<std::vector<std::vector<std::vector<double>>>> prob(
      static_cast<std::size_t>(view.horizon()),
      std::vector<std::vector<std::vector<double>>>(
          nu, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))));
  for (int t = 0; t < view.horizon(); ++t)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t w = 0; w < nw; ++w)
          prob[static_cast<std::size_t>(t)][u][x][view.f_model(t, x, u, w)] +=
              view.law().disturbance[static_cast<std::size_t>(t)].mass_at(w);
  return MarkovKernel(n, std::move(prob));
}

MarkovKernel MarkovKernel::actual_exact(const Scenario& s) {
  require(s.family == Family::finite, ErrorClass::unsupported,
          "MarkovKernel: finite family only");
  const std::size_t n = s.n_states();
  const std::size_t nu = s.n_controls();
  const std::size_t nw = s.disturbances.size();
  std::vector<std::vector<std::vector<std::vector<double>>>> prob(
      static_cast<std::size_t>(s.horizon),
      std::vector<std::vector<std::vector<double>>>(
          nu, std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0))));
  for (int t = 0; t < s.horizon; ++t)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t w = 0; w < nw; ++w)
          prob[static_cast<std::size_t>(t)][u][x][s.f_actual(t, x, u, w)] +=
              s.law.disturbance[static_cast<std::size_t>(t)].mass_at(w);
  return MarkovKernel(n, std::move(prob));
}

double MarkovKernel::prob(int t, std::size_t u, std::size_t x, std::size_t x_next) const {
  require(t >= 0 && static_cast<std::size_t>(t) < prob_.size(), ErrorClass::domain,
          "MarkovKernel: time outside horizon");
  const auto& per_t = prob_[static_cast<std::size_t>(t)];
  require(u < per_t.size() && x < n_ && x_next < n_, ErrorClass::domain,
          "MarkovKernel: index outside space");
  return per_t[u][x][x_next];
}

JointKernel::JointKernel(std::size_t n_states,
                         std::vector<std::vector<std::vector<std::vector<double>>>> prob)
    : n_(n_states), prob_(std::move(prob)) {}

JointKernel JointKernel::exact(const Scenario& s) {
  require(s.family == Family::finite, ErrorClass::unsupported,
          "JointKernel: finite family only");
  const std::size_t n = s.n_states();
  const std::size_t np = n * n;
  const std::size_t nu = s.n_controls();
  const std::size_t nw = s.disturbances.size();
  std::vector<std::vector<std::vector<std::vector<double>>>> prob(
      static_cast<std::size_t>(s.horizon),
      std::vector<std::vector<std::vector<double>>>(
          nu, std::vector<std::vector<double>>(np, std::vector<double>(np, 0.0))));
  for (int t = 0; t < s.horizon; ++t)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t xh = 0; xh < n; ++xh)
          for (std::size_t w = 0; w < nw; ++w) {
            // The same disturbance realization drives both systems.
            const std::size_t x2 = s.f_model(t, x, u, w);
            const std::size_t xh2 = s.f_actual(t, xh, u, w);
            prob[static_cast<std::size_t>(t)][u][x * n + xh][x2 * n + xh2] +=
                s.law.disturbance[static_cast<std::size_t>(t)].mass_at(w);
          }
  return JointKernel(n, std::move(prob));
}

double JointKernel::prob(int t, std::size_t u, std::size_t pair, std::size_t pair_next) const {
  require(t >= 0 && static_cast<std::size_t>(t) < prob_.size(), ErrorClass::domain,
          "JointKernel: time outside horizon");
  const auto& per_t = prob_[static_cast<std::size_t>(t)];
  require(u < per_t.size() && pair < n_ * n_ && pair_next < n_ * n_, ErrorClass::domain,
          "JointKernel: index outside space");
  return per_t[u][pair][pair_next];
}

double JointKernel::prob(int t, std::size_t u, std::size_t x, std::size_t x_hat,
                         std::size_t x_next, std::size_t x_hat_next) const {
  return prob(t, u, x * n_ + x_hat, x_next * n_ + x_hat_next);
}

// ---------------------------------------------------------------------------
// Operations

double observation_likelihood(const ModelView& view, int t, std::size_t y, std::size_t x) {
  require(view.family() == Family::finite, ErrorClass::unsupported,
          "observation_likelihood: finite family only");
  require(y < view.n_observations(), ErrorClass::domain,
          "observation_likelihood: observation outside space");
  double total = 0.0;
  for (std::size_t z = 0; z < view.noises().size(); ++z)
    if (view.h_observe(t, x, z) == y)
      total += view.law().noise[static_cast<std::size_t>(t)].mass_at(z);
  return total;
}

double joint_transition(const Scenario& s, int t, std::size_t u, std::size_t x,
                        std::size_t x_hat, std::size_t x_next, std::size_t x_hat_next) {
  require(s.family == Family::finite, ErrorClass::unsupported,
          "joint_transition: finite family only");
  require(t >= 0 && t < s.horizon, ErrorClass::domain, "joint_transition: time outside horizon");
  double total = 0.0;
  for (std::size_t w = 0; w < s.disturbances.size(); ++w)
    if (s.f_model(t, x, u, w) == x_next && s.f_actual(t, x_hat, u, w) == x_hat_next)
      total += s.law.disturbance[static_cast<std::size_t>(t)].mass_at(w);
  return total;
}

InformationState initial_information_state(const ModelView& view, std::size_t y0) {
  const std::size_t n = view.n_states();
  std::vector<double> joint(n * n, 0.0);
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double m = view.law().initial->mass_at(x) * observation_likelihood(view, 0, y0, x);
    joint[x * n + x] = m;  // shared initial state: mass on the diagonal only
    total += m;
  }
  require(total > 0.0, ErrorClass::impossible_observation,
          "initial observation has zero probability under the initial law");
  for (double& m : joint) m /= total;
  return InformationState(0, n, std::move(joint));
}

InformationState phi_update(const ModelView& view, const JointKernel& kernel,
                            const InformationState& pi, std::size_t y_next, std::size_t u) {
  require(pi.t() < view.horizon(), ErrorClass::domain,
          "phi_update: information state already at the terminal time");
  require(u < view.n_controls(), ErrorClass::domain, "phi_update: control outside space");
  const std::size_t n = pi.n_states();
  require(kernel.n_states() == n, ErrorClass::domain, "phi_update: kernel size mismatch");
  const std::size_t np = n * n;

  std::vector<double> predicted(np, 0.0);
  for (std::size_t pair = 0; pair < np; ++pair) {
    const double m = pi.joint()[pair];
    if (m == 0.0) continue;
    for (std::size_t pair2 = 0; pair2 < np; ++pair2) {
      const double k = kernel.prob(pi.t(), u, pair, pair2);
      if (k != 0.0) predicted[pair2] += m * k;
    }
  }

  double total = 0.0;
  for (std::size_t x2 = 0; x2 < n; ++x2) {
    const double lik = observation_likelihood(view, pi.t() + 1, y_next, x2);
    for (std::size_t xh2 = 0; xh2 < n; ++xh2) {
      predicted[x2 * n + xh2] *= lik;
      total += predicted[x2 * n + xh2];
    }
  }
  require(total > 0.0, ErrorClass::impossible_observation,
          "phi_update: observation has zero predictive probability");
  for (double& m : predicted) m /= total;
  return InformationState(pi.t() + 1, n, std::move(predicted));
}

InformationState phi_update(const Scenario& s, const InformationState& pi, std::size_t y_next,
                            std::size_t u) {
  return phi_update(ModelView(s), JointKernel::exact(s), pi, y_next, u);
}

namespace {

Distribution belief_update(const ModelView& view, const MarkovKernel& kernel,
                           const Distribution& belief, int t, std::size_t y_next,
                           std::size_t u) {
  require(t < view.horizon(), ErrorClass::domain, "belief update: time outside horizon");
  const std::size_t n = view.n_states();
  require(belief.size() == n && kernel.n_states() == n, ErrorClass::domain,
          "belief update: size mismatch");
  std::vector<double> predicted(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const double m = belief.mass_at(x);
    if (m == 0.0) continue;
    for (std::size_t x2 = 0; x2 < n; ++x2) predicted[x2] += m * kernel.prob(t, u, x, x2);
  }
  double total = 0.0;
  for (std::size_t x2 = 0; x2 < n; ++x2) {
    predicted[x2] *= observation_likelihood(view, t + 1, y_next, x2);
    total += predicted[x2];
  }
  require(total > 0.0, ErrorClass::impossible_observation,
          "belief update: observation has zero predictive probability");
  for (double& m : predicted) m /= total;
  return Distribution(belief.support(), std::move(predicted));
}

}  // namespace

Distribution theta_update(const ModelView& view, const Distribution& belief, int t,
                          std::size_t y_next, std::size_t u) {
  return belief_update(view, MarkovKernel::model(view), belief, t, y_next, u);
}

Distribution theta_hat_update(const ModelView& view, const MarkovKernel& actual_kernel,
                              const Distribution& belief, int t, std::size_t y_hat_next,
                              std::size_t u) {
  require(actual_kernel.horizon() > 0, ErrorClass::usage,
          "theta_hat_update: an actual-system kernel must be supplied");
  return belief_update(view, actual_kernel, belief, t, y_hat_next, u);
}

InformationState factorize(int t, const Distribution& model_belief,
                           const std::vector<Distribution>& actual_belief_by_history,
                           const std::vector<double>& obs_history_weight) {
  require(actual_belief_by_history.size() == obs_history_weight.size(), ErrorClass::domain,
          "factorize: history index mismatch between beliefs and weights");
  require(!actual_belief_by_history.empty(), ErrorClass::domain,
          "factorize: empty history mixture");
  const std::size_t n = model_belief.size();
  std::vector<double> mixture(n, 0.0);
  double total_weight = 0.0;
  for (std::size_t h = 0; h < obs_history_weight.size(); ++h) {
    const double wgt = obs_history_weight[h];
    require(std::isfinite(wgt) && wgt >= 0.0, ErrorClass::domain,
            "factorize: negative or non-finite history weight");
    total_weight += wgt;
    if (wgt == 0.0) continue;
    require(actual_belief_by_history[h].size() == n, ErrorClass::domain,
            "factorize: belief support size mismatch");
    for (std::size_t xh = 0; xh < n; ++xh)
      mixture[xh] += wgt * actual_belief_by_history[h].mass_at(xh);
  }
  require(std::abs(total_weight - 1.0) <= kMassTolerance, ErrorClass::domain,
          "factorize: history weights must sum to 1");

  std::vector<double> joint(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t xh = 0; xh < n; ++xh)
      joint[x * n + xh] = model_belief.mass_at(x) * mixture[xh];
  return InformationState(t, n, std::move(joint));
}

IndependenceReport verify_policy_independence(const Scenario& s,
                                              const DeterministicStrategy& strategy_a,
                                              const DeterministicStrategy& strategy_b) {
  const auto atoms = enumerate_atoms(s);
  const std::size_t n = s.n_states();
  const auto T = static_cast<std::size_t>(s.horizon);

  // key: (t, y-history code, u-history code) -> unnormalized joint over pairs
  using HistKey = std::tuple<std::size_t, std::size_t, std::size_t>;
  auto accumulate = [&](const DeterministicStrategy& g) {
    std::map<HistKey, std::vector<double>> cond;
    for (const Atom& atom : atoms) {
      const ClosedLoopTrace tr = closed_loop_trace(s, g, atom);
      for (std::size_t t = 0; t <= T; ++t) {
        const std::size_t ycode =
            history_code(std::span<const std::size_t>(tr.y.data(), t + 1), s.n_observations());
        const std::size_t ucode =
            history_code(std::span<const std::size_t>(tr.u.data(), t), s.n_controls());
        auto& table = cond[{t, ycode, ucode}];
        if (table.empty()) table.assign(n * n, 0.0);
        table[tr.x[t] * n + tr.x_hat[t]] += atom.prob;
      }
    }
    return cond;
  };

  const auto cond_a = accumulate(strategy_a);
  const auto cond_b = accumulate(strategy_b);

  IndependenceReport report;
  for (const auto& [key, table_a] : cond_a) {
    auto it = cond_b.find(key);
    if (it == cond_b.end()) continue;  // not reachable under both
    const auto& table_b = it->second;
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i = 0; i < table_a.size(); ++i) {
      sum_a += table_a[i];
      sum_b += table_b[i];
    }
    ++report.histories_compared;
    for (std::size_t i = 0; i < table_a.size(); ++i)
      report.max_discrepancy =
          std::max(report.max_discrepancy, std::abs(table_a[i] / sum_a - table_b[i] / sum_b));
  }
  report.vacuous = report.histories_compared == 0;
  return report;
}

}  // namespace sepctl::filter
