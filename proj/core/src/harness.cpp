#include "sepctl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "sepctl/errors.hpp"
#include "sepctl/primitives.hpp"
#include "sepctl/scenarios.hpp"
#include "sepctl/textio.hpp"
#include "sepctl/version.hpp"

namespace sepctl::harness {

std::size_t Controller::decide(const FiniteStep&) const {
  fail(ErrorClass::unsupported, "controller '" + id() + "' does not handle finite scenarios");
}

double Controller::decide(const RealStep&) const {
  fail(ErrorClass::unsupported, "controller '" + id() + "' does not handle gaussian scenarios");
}

StrategyController::StrategyController(DeterministicStrategy strategy,
                                       std::size_t n_observations, std::string id)
    : strategy_(std::move(strategy)), n_observations_(n_observations), id_(std::move(id)) {}

std::size_t StrategyController::decide(const FiniteStep& step) const {
  return strategy_.decide(step.t, std::span<const std::size_t>(step.y_history),
                          n_observations_);
}

MatchingController::MatchingController(const Scenario& s)
    : model_(s.model_lin), actual_(s.actual_lin) {
  require(s.family == Family::gaussian_linear, ErrorClass::unsupported,
          "MatchingController: gaussian_linear family only");
  for (int t = 0; t < s.horizon; ++t)
    require(model_[t].b != actual_[t].b, ErrorClass::unsupported,
            "MatchingController: equal control coefficients leave no matching control at t=" +
                std::to_string(t));
}

double MatchingController::decide(const RealStep& step) const {
  const LinearStep& f = model_[static_cast<std::size_t>(step.t)];
  const LinearStep& fh = actual_[static_cast<std::size_t>(step.t)];
  return (fh.a * step.x_hat - f.a * step.x + (fh.c - f.c) * step.w) / (f.b - fh.b);
}

LinearController::LinearController(double a, double b, double c, std::string id)
    : a_(a), b_(b), c_(c), id_(std::move(id)) {}

double LinearController::decide(const RealStep& step) const {
  if (step.t == 0) return a_ * step.y_hat_history[0];
  if (step.t == 1) return b_ * step.y_hat_history[1] + c_ * step.y_hat_history[0];
  fail(ErrorClass::unsupported, "LinearController: defined for horizon-2 scenarios only");
}

namespace {

double sum(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total;
}

Trajectory run_finite(const Scenario& s, const Controller& controller,
                      const PrimitiveDraw& draw) {
  const int horizon = s.horizon;
  Trajectory traj;
  traj.family = Family::finite;
  traj.horizon = horizon;
  traj.x.push_back(draw.x0);
  traj.x_hat.push_back(draw.x0);  // both systems start in the shared initial state
  traj.z = draw.z;

  for (int t = 0; t <= horizon; ++t) {
    traj.y.push_back(s.h_observe(t, traj.x.back(), draw.z[static_cast<std::size_t>(t)]));
    traj.y_hat.push_back(s.h_observe(t, traj.x_hat.back(), draw.z[static_cast<std::size_t>(t)]));
    if (t == horizon) break;

    const std::size_t w = draw.w[static_cast<std::size_t>(t)];
    const FiniteStep step{t, traj.y, traj.y_hat, traj.u, traj.x.back(), traj.x_hat.back(), w};
    const std::size_t u = controller.decide(step);
    require(u < s.n_controls(), ErrorClass::domain,
            "controller '" + controller.id() + "' emitted control index " + std::to_string(u) +
                " outside the declared control space");
    traj.u.push_back(u);
    traj.w.push_back(w);
    traj.model_cost.push_back(s.stage_cost(t, traj.x.back(), u));
    traj.actual_cost.push_back(s.stage_cost(t, traj.x_hat.back(), u));
    traj.x.push_back(s.f_model(t, traj.x.back(), u, w));
    traj.x_hat.push_back(s.f_actual(t, traj.x_hat.back(), u, w));
  }
  traj.model_cost.push_back(s.terminal_cost(traj.x.back()));
  traj.actual_cost.push_back(s.terminal_cost(traj.x_hat.back()));

  traj.penalty.push_back(0.0);
  for (int t = 1; t <= horizon; ++t)
    traj.penalty.push_back(mismatch_penalty(s, traj.x[static_cast<std::size_t>(t)],
                                            traj.x_hat[static_cast<std::size_t>(t)]));
  return traj;
}

Trajectory run_gaussian(const Scenario& s, const Controller& controller,
                        const PrimitiveDraw& draw) {
  const int horizon = s.horizon;
  Trajectory traj;
  traj.family = Family::gaussian_linear;
  traj.horizon = horizon;
  traj.x_real.push_back(draw.x0_real);
  traj.x_hat_real.push_back(draw.x0_real);
  traj.z_real = draw.z_real;

  for (int t = 0; t <= horizon; ++t) {
    traj.y_real.push_back(
        s.h_observe_lin(t, traj.x_real.back(), draw.z_real[static_cast<std::size_t>(t)]));
    traj.y_hat_real.push_back(
        s.h_observe_lin(t, traj.x_hat_real.back(), draw.z_real[static_cast<std::size_t>(t)]));
    if (t == horizon) break;

    const double w = draw.w_real[static_cast<std::size_t>(t)];
    const RealStep step{t,
                        traj.y_real,
                        traj.y_hat_real,
                        traj.u_real,
                        traj.x_real.back(),
                        traj.x_hat_real.back(),
                        w};
    const double u = controller.decide(step);
    require(std::isfinite(u), ErrorClass::domain,
            "controller '" + controller.id() + "' emitted a non-finite control");
    traj.u_real.push_back(u);
    traj.w_real.push_back(w);
    traj.model_cost.push_back(s.stage_cost_lin(t, traj.x_real.back(), u));
    traj.actual_cost.push_back(s.stage_cost_lin(t, traj.x_hat_real.back(), u));
    traj.x_real.push_back(s.f_model_lin(t, traj.x_real.back(), u, w));
    traj.x_hat_real.push_back(s.f_actual_lin(t, traj.x_hat_real.back(), u, w));
  }
  traj.model_cost.push_back(s.terminal_cost_lin(traj.x_real.back()));
  traj.actual_cost.push_back(s.terminal_cost_lin(traj.x_hat_real.back()));

  traj.penalty.push_back(0.0);
  for (int t = 1; t <= horizon; ++t)
    traj.penalty.push_back(mismatch_penalty_lin(s, traj.x_real[static_cast<std::size_t>(t)],
                                                traj.x_hat_real[static_cast<std::size_t>(t)]));
  return traj;
}

}  // namespace

double Trajectory::total_model_cost() const { return sum(model_cost); }
double Trajectory::total_actual_cost() const { return sum(actual_cost); }
double Trajectory::total_penalized_cost() const { return sum(model_cost) + sum(penalty); }

Trajectory run_parallel(const Scenario& s, const Controller& controller, std::uint64_t seed) {
  const PrimitiveDraw draw = sample_primitives(s, seed);
  return s.family == Family::finite ? run_finite(s, controller, draw)
                                    : run_gaussian(s, controller, draw);
}

namespace {

std::uint64_t rollout_seed(std::uint64_t master_seed, std::uint64_t index) {
  // One substream per rollout so rollouts can execute in any order.
  return derive_stream(master_seed, index).next_u64();
}

struct Totals {
  double actual = 0.0;
  double penalized = 0.0;
};

std::vector<Totals> per_rollout_totals(const Scenario& s, const Controller& controller,
                                       std::size_t n, std::uint64_t seed) {
  std::vector<Totals> totals(n);
  const auto fill = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Trajectory traj = run_parallel(s, controller, rollout_seed(seed, i));
      totals[i] = {traj.total_actual_cost(), traj.total_penalized_cost()};
    }
  };
  const std::size_t workers = std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                    n >= 4096 ? n / 2048 : 1);
  if (workers < 2) {
    fill(0, n);
    return totals;
  }
  std::vector<std::future<void>> futures;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t lo = 0; lo < n; lo += chunk)
    futures.push_back(std::async(std::launch::async, fill, lo, std::min(n, lo + chunk)));
  for (auto& f : futures) f.get();
  return totals;
}

// Mean and standard error, accumulated in index order for determinism.
std::pair<double, double> mean_and_se(const std::vector<Totals>& totals,
                                      double Totals::* member) {
  const auto n = static_cast<double>(totals.size());
  double total = 0.0;
  for (const Totals& t : totals) total += t.*member;
  const double mean = total / n;
  if (totals.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (const Totals& t : totals) sq += (t.*member - mean) * (t.*member - mean);
  return {mean, std::sqrt(sq / (n - 1.0) / n)};
}

}  // namespace

CostEstimate monte_carlo_cost(const Scenario& s, const Controller& controller, std::size_t n,
                              std::uint64_t seed) {
  require(n >= 1, ErrorClass::usage, "monte_carlo_cost: rollout count must be at least 1");
  const std::vector<Totals> totals = per_rollout_totals(s, controller, n, seed);
  CostEstimate est;
  est.rollouts = n;
  std::tie(est.actual_cost_mean, est.actual_cost_se) = mean_and_se(totals, &Totals::actual);
  std::tie(est.penalized_cost_mean, est.penalized_cost_se) =
      mean_and_se(totals, &Totals::penalized);
  return est;
}

AuditReport audit_cost_transfer(const Scenario& s, const Trajectory& trajectory) {
  AuditReport report;
  for (int t = 0; t <= trajectory.horizon; ++t) {
    const auto i = static_cast<std::size_t>(t);
    const double gap = trajectory.family == Family::finite
                           ? std::abs(s.state_value(trajectory.x[i]) -
                                      s.state_value(trajectory.x_hat[i]))
                           : std::abs(trajectory.x_real[i] - trajectory.x_hat_real[i]);
    report.state_gap.push_back(gap);
  }
  for (double gap : report.state_gap) report.max_state_gap = std::max(report.max_state_gap, gap);
  report.total_model_cost = trajectory.total_model_cost();
  report.total_actual_cost = trajectory.total_actual_cost();
  report.matched = report.max_state_gap <= 1e-9;
  report.costs_equal = std::abs(report.total_model_cost - report.total_actual_cost) <= 1e-9;
  report.transfer_holds = !report.matched || report.costs_equal;
  return report;
}

RunLog collect_run_log(const Scenario& s, const Controller& controller, std::size_t n,
                       std::uint64_t seed) {
  require(n >= 1, ErrorClass::usage, "collect_run_log: rollout count must be at least 1");
  RunLog log;
  log.scenario_hash = scenarios::scenario_hash(s);
  log.strategy_id = controller.id();
  log.seed = seed;
  log.beta = s.beta;
  log.rollouts.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    log.rollouts.push_back(run_parallel(s, controller, rollout_seed(seed, i)));

  log.mean_penalty_per_step.assign(static_cast<std::size_t>(s.horizon) + 1, 0.0);
  double actual_total = 0.0, penalized_total = 0.0;
  for (const Trajectory& traj : log.rollouts) {
    actual_total += traj.total_actual_cost();
    penalized_total += traj.total_penalized_cost();
    for (std::size_t t = 0; t < traj.penalty.size(); ++t)
      log.mean_penalty_per_step[t] += traj.penalty[t];
  }
  const auto count = static_cast<double>(n);
  log.mean_actual_cost = actual_total / count;
  log.mean_penalized_cost = penalized_total / count;
  for (double& p : log.mean_penalty_per_step) p /= count;
  return log;
}

std::string serialize_run_log(const Scenario& s, const RunLog& log) {
  std::ostringstream out;
  out << "# run-log v1\n";
  out << "# tool_version," << kVersion << "\n";
  out << "# scenario_hash," << to_hex64(log.scenario_hash) << "\n";
  out << "# strategy," << log.strategy_id << "\n";
  out << "# seed," << log.seed << "\n";
  out << "# beta," << format_double(log.beta) << "\n";
  out << "rollout,t,x,x_hat,y,y_hat,u,w,z,c_model,c_actual,penalty\n";

  const bool finite = s.family == Family::finite;
  for (std::size_t i = 0; i < log.rollouts.size(); ++i) {
    const Trajectory& traj = log.rollouts[i];
    for (int t = 0; t <= traj.horizon; ++t) {
      const auto k = static_cast<std::size_t>(t);
      const bool last = t == traj.horizon;
      out << i << "," << t << ",";
      if (finite) {
        out << s.states.labels[traj.x[k]] << "," << s.states.labels[traj.x_hat[k]] << ","
            << s.observations.labels[traj.y[k]] << "," << s.observations.labels[traj.y_hat[k]]
            << "," << (last ? "" : s.controls.labels[traj.u[k]]) << ","
            << (last ? "" : s.disturbances.labels[traj.w[k]]) << ","
            << s.noises.labels[traj.z[k]];
      } else {
        out << format_double(traj.x_real[k]) << "," << format_double(traj.x_hat_real[k]) << ","
            << format_double(traj.y_real[k]) << "," << format_double(traj.y_hat_real[k]) << ","
            << (last ? "" : format_double(traj.u_real[k])) << ","
            << (last ? "" : format_double(traj.w_real[k])) << ","
            << format_double(traj.z_real[k]);
      }
      const double c_model = traj.model_cost[k];
      const double c_actual = traj.actual_cost[k];
      out << "," << format_double(c_model) << "," << format_double(c_actual) << ","
          << format_double(traj.penalty[k]) << "\n";
    }
  }

  out << "# summary\n";
  out << "# rollouts," << log.rollouts.size() << "\n";
  out << "# mean_actual_cost," << format_double(log.mean_actual_cost) << "\n";
  out << "# mean_penalized_cost," << format_double(log.mean_penalized_cost) << "\n";
  for (std::size_t t = 0; t < log.mean_penalty_per_step.size(); ++t)
    out << "# mean_penalty,t=" << t << "," << format_double(log.mean_penalty_per_step[t])
        << "\n";
  return out.str();
}

}  // namespace sepctl::harness
