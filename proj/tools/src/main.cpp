// sepctl: command-line front end for the separated learning-and-control
// library.  Verbs: solve, simulate, learn, verify, report.  Every artifact
// embeds the tool version and the scenario hash; identical command lines and
// seeds produce byte-identical artifacts.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sepctl/enumeration.hpp"
#include "sepctl/errors.hpp"
#include "sepctl/filter.hpp"
#include "sepctl/harness.hpp"
#include "sepctl/learner.hpp"
#include "sepctl/primitives.hpp"
#include "sepctl/scenario.hpp"
#include "sepctl/scenarios.hpp"
#include "sepctl/solver.hpp"
#include "sepctl/strategy.hpp"
#include "sepctl/textio.hpp"
#include "sepctl/version.hpp"

namespace {

using namespace sepctl;

int exit_code_for(ErrorClass c) {
  switch (c) {
    case ErrorClass::usage:
      return 2;
    case ErrorClass::parse:
      return 3;
    case ErrorClass::verification:
      return 4;
    case ErrorClass::insufficient_data:
      return 5;
    default:
      return 1;
  }
}

struct CommonArgs {
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t rollouts = 10000;
  std::optional<double> beta;
  std::string out;  // empty = stdout
};

Scenario resolve_scenario(const CommonArgs& args) {
  Scenario s = [&] {
    if (std::filesystem::exists(args.scenario)) return scenarios::load_file(args.scenario);
    try {
      return scenarios::builtin(args.scenario);
    } catch (const Error&) {
      fail(ErrorClass::usage, "scenario '" + args.scenario +
                                  "' is neither a readable file nor a builtin "
                                  "(discrete_toy, lqg)");
    }
  }();
  if (args.beta) {
    s.beta = *args.beta;
    s.validate();
  }
  return s;
}

void emit(const CommonArgs& args, const std::string& artifact) {
  if (args.out.empty()) {
    std::cout << artifact;
    return;
  }
  std::ofstream file(args.out, std::ios::binary);
  require(file.good(), ErrorClass::usage, "cannot open output file '" + args.out + "'");
  file << artifact;
  require(file.good(), ErrorClass::usage, "failed writing output file '" + args.out + "'");
}

// Default finite-family demonstration strategy: u_t echoes the latest
// observation index (mod the control count), so controls depend on the
// realized observations without any offline solving.
DeterministicStrategy cyclic_strategy(const ModelView& view) {
  DeterministicStrategy strategy;
  const std::size_t n_obs = view.n_observations();
  const std::size_t n_controls = view.n_controls();
  std::size_t codes = n_obs;
  for (int t = 0; t < view.horizon(); ++t) {
    std::vector<std::size_t> row(codes);
    for (std::size_t code = 0; code < codes; ++code)
      row[code] = decode_history(code, static_cast<std::size_t>(t) + 1, n_obs).back() % n_controls;
    strategy.table.push_back(std::move(row));
    codes *= n_obs;
  }
  return strategy;
}

std::unique_ptr<harness::Controller> finite_controller(const Scenario& s, bool separated,
                                                       std::optional<std::uint64_t> ordinal) {
  const ModelView view(s);
  if (separated) {
    const auto grid =
        solver::BeliefGrid::exact_reachable(view, filter::JointKernel::exact(s));
    solver::DpResult result = solver::dp_solve(s, grid);
    return learner::instantiate_strategy(result.strategy, grid,
                                         std::shared_ptr<learner::InformationStateProvider>(
                                             learner::exact_provider(s)));
  }
  if (ordinal)
    return std::make_unique<harness::StrategyController>(
        DeterministicStrategy::from_ordinal(view, *ordinal), view.n_observations(),
        "ordinal-" + std::to_string(*ordinal));
  return std::make_unique<harness::StrategyController>(cyclic_strategy(view),
                                                       view.n_observations(), "cyclic");
}

std::unique_ptr<harness::Controller> gaussian_controller(const Scenario& s, bool matching,
                                                         const std::vector<double>& linear) {
  if (matching) return std::make_unique<harness::MatchingController>(s);
  if (!linear.empty())
    return std::make_unique<harness::LinearController>(linear[0], linear[1], linear[2]);
  require(s.reference_coefficients.size() >= 2, ErrorClass::usage,
          "gaussian scenario without reference coefficients: pass --matching or --linear a b c");
  return std::make_unique<harness::LinearController>(s.reference_coefficients[0], 0.0,
                                                     s.reference_coefficients[1], "reference");
}

std::unique_ptr<harness::Controller> make_controller(const Scenario& s, bool separated,
                                                     std::optional<std::uint64_t> ordinal,
                                                     bool matching,
                                                     const std::vector<double>& linear) {
  return s.family == Family::finite ? finite_controller(s, separated, ordinal)
                                    : gaussian_controller(s, matching, linear);
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const CommonArgs& args, std::optional<std::size_t> grid_resolution) {
  const Scenario s = resolve_scenario(args);
  if (s.family == Family::gaussian_linear) {
    const solver::LqgReport report = solver::lqg_stagewise_solve(s);
    emit(args, solver::serialize_lqg_report(s, report));
    return 0;
  }
  const ModelView view(s);
  const auto kernel = filter::JointKernel::exact(s);
  const auto grid = grid_resolution ? solver::BeliefGrid::uniform(view, *grid_resolution)
                                    : solver::BeliefGrid::exact_reachable(view, kernel);
  const solver::DpResult result =
      solver::dp_solve(view, kernel, grid, scenarios::scenario_hash(s));
  emit(args, solver::serialize_tables(view, result));
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const CommonArgs& args, bool separated, std::optional<std::uint64_t> ordinal,
                 bool matching, const std::vector<double>& linear) {
  require(args.rollouts >= 1, ErrorClass::usage, "simulate: --rollouts must be at least 1");
  const Scenario s = resolve_scenario(args);
  const auto controller = make_controller(s, separated, ordinal, matching, linear);
  const harness::RunLog log = harness::collect_run_log(s, *controller, args.rollouts, args.seed);
  emit(args, harness::serialize_run_log(s, log));
  return 0;
}

// ---------------------------------------------------------------------------
// learn

// Exact conditional law of the actual-side observation history given the
// realized control history under a fixed strategy, by enumerating every
// primitive realization.
std::map<std::vector<std::size_t>, std::map<std::vector<std::size_t>, double>>
exact_conditional(const Scenario& s, const DeterministicStrategy& strategy) {
  std::map<std::vector<std::size_t>, std::map<std::vector<std::size_t>, double>> joint;
  for (const Atom& atom : enumerate_atoms(s)) {
    const ClosedLoopTrace trace = closed_loop_trace(s, strategy, atom);
    joint[trace.u][trace.y_hat] += atom.prob;
  }
  for (auto& [u_history, cells] : joint) {
    double total = 0.0;
    for (const auto& [y_history, mass] : cells) total += mass;
    for (auto& [y_history, mass] : cells) mass /= total;
  }
  return joint;
}

// Frequency-weighted average TV distance between the empirical conditional
// and the exact one, over the full-horizon control histories seen so far.
double weighted_tv(const Scenario& s, const learner::EmpiricalConditional& emp,
                   std::size_t rollouts_so_far,
                   const std::map<std::vector<std::size_t>,
                                  std::map<std::vector<std::size_t>, double>>& exact) {
  const auto histories = learner::enumerate_observation_histories(
      s.n_observations(), static_cast<std::size_t>(s.horizon) + 1);
  double tv_total = 0.0;
  for (const auto& [u_history, cells] : exact) {
    const std::uint64_t seen = emp.total(u_history);
    if (seen == 0) continue;
    const Distribution empirical = emp.query(u_history, s.observations);
    double tv = 0.0;
    for (std::size_t i = 0; i < histories.size(); ++i) {
      const auto cell = cells.find(histories[i]);
      const double exact_mass = cell == cells.end() ? 0.0 : cell->second;
      tv += std::abs(empirical.mass_at(i) - exact_mass);
    }
    tv_total += 0.5 * tv * static_cast<double>(seen);
  }
  return tv_total / static_cast<double>(rollouts_so_far);
}

std::vector<std::size_t> checkpoints(std::size_t n) {
  std::vector<std::size_t> points;
  for (std::size_t p = 10; p < n; p *= 10) points.push_back(p);
  points.push_back(n);
  return points;
}

int cmd_learn(const CommonArgs& args, double alpha) {
  require(args.rollouts >= 1, ErrorClass::usage, "learn: --rollouts must be at least 1");
  const Scenario s = resolve_scenario(args);
  require(s.family == Family::finite, ErrorClass::unsupported,
          "learn: conditional-probability learning runs on finite scenarios only");
  const ModelView view(s);
  const DeterministicStrategy strategy = cyclic_strategy(view);
  const harness::StrategyController controller(strategy, view.n_observations(), "cyclic");

  learner::EmpiricalConditional emp(scenarios::scenario_hash(s), alpha);
  const auto exact = exact_conditional(s, strategy);
  const std::vector<std::size_t> marks = checkpoints(args.rollouts);
  std::vector<std::pair<std::size_t, double>> tv_curve;

  std::size_t next_mark = 0;
  for (std::size_t i = 0; i < args.rollouts; ++i) {
    const harness::Trajectory traj =
        harness::run_parallel(s, controller, derive_stream(args.seed, i).next_u64());
    for (int t = 0; t <= s.horizon; ++t) {
      const std::vector<std::size_t> u_prefix(traj.u.begin(), traj.u.begin() + t);
      const std::vector<std::size_t> y_prefix(traj.y_hat.begin(), traj.y_hat.begin() + t + 1);
      emp.record(u_prefix, y_prefix);
    }
    if (next_mark < marks.size() && i + 1 == marks[next_mark]) {
      tv_curve.emplace_back(i + 1, weighted_tv(s, emp, i + 1, exact));
      ++next_mark;
    }
  }

  std::ostringstream out;
  out << emp.serialize(s.controls, s.observations);
  out << "# table,tv_vs_samples\n";
  out << "samples,weighted_tv\n";
  for (const auto& [samples, tv] : tv_curve)
    out << samples << "," << format_double(tv) << "\n";
  emit(args, out.str());
  return 0;
}

// ---------------------------------------------------------------------------
// verify

class CheckList {
 public:
  void run(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << "check " << name << ": " << (ok ? "pass" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) failed_ = true;
  }
  void info(const std::string& line) { std::cout << "info " << line << "\n"; }
  bool failed() const { return failed_; }

 private:
  bool failed_ = false;
};

int verify_finite(const Scenario& s) {
  CheckList checks;
  const ModelView view(s);
  const auto kernel = filter::JointKernel::exact(s);
  const auto grid = solver::BeliefGrid::exact_reachable(view, kernel);
  const solver::DpResult dp = solver::dp_solve(s, grid);
  const solver::OracleResult oracle = solver::exhaustive_oracle(s);

  const double v0 = solver::expected_initial_value(view, grid, dp.value);
  checks.run("dp-matches-exhaustive-oracle", std::abs(v0 - oracle.min_cost) <= 1e-12,
             "dp " + format_double(v0) + " vs oracle " + format_double(oracle.min_cost));

  double worst_independence = 0.0;
  const std::uint64_t count = DeterministicStrategy::count(view);
  const std::vector<std::uint64_t> probes = {0, count / 3, count / 2, count - 1};
  for (std::size_t i = 0; i < probes.size(); ++i)
    for (std::size_t j = i + 1; j < probes.size(); ++j) {
      const auto report = filter::verify_policy_independence(
          s, DeterministicStrategy::from_ordinal(view, probes[i]),
          DeterministicStrategy::from_ordinal(view, probes[j]));
      worst_independence = std::max(worst_independence, report.max_discrepancy);
    }
  checks.run("information-state-policy-independence", worst_independence <= 1e-12,
             "max discrepancy " + format_double(worst_independence));

  bool transfer_ok = true;
  const auto controller = finite_controller(s, true, std::nullopt);
  for (std::uint64_t i = 0; i < 64; ++i) {
    const auto traj = harness::run_parallel(s, *controller, derive_stream(77, i).next_u64());
    if (!harness::audit_cost_transfer(s, traj).transfer_holds) transfer_ok = false;
  }
  checks.run("zero-penalty-cost-transfer", transfer_ok);

  return checks.failed() ? exit_code_for(ErrorClass::verification) : 0;
}

int verify_gaussian(const Scenario& s) {
  CheckList checks;
  const solver::LqgReport report = solver::lqg_stagewise_solve(s);

  bool matching_ok = true;
  const harness::MatchingController matcher(s);
  for (std::uint64_t i = 0; i < 256; ++i) {
    const auto traj = harness::run_parallel(s, matcher, derive_stream(77, i).next_u64());
    const auto audit = harness::audit_cost_transfer(s, traj);
    if (!audit.matched || !audit.costs_equal) matching_ok = false;
  }
  checks.run("matching-control-state-match-and-cost-transfer", matching_ok);

  if (!std::isnan(report.reference_cost)) {
    checks.run("oracle-no-worse-than-reference",
               report.oracle.cost <= report.reference_cost + 1e-9,
               "oracle " + format_double(report.oracle.cost) + " vs reference " +
                   format_double(report.reference_cost));
    checks.info("reference solution cost " + format_double(report.reference_cost) +
                " at coefficients (" + format_double(s.reference_coefficients[0]) + ", " +
                format_double(s.reference_coefficients[1]) + ")");
  }
  checks.info("grid-search optimum cost " + format_double(report.oracle.cost) + " at (" +
              format_double(report.oracle.a) + ", " + format_double(report.oracle.b) + ", " +
              format_double(report.oracle.c) + ")");
  checks.info("stagewise second-stage coefficient " +
              format_double(report.stationary_u1_coeff) + "; derived first-stage reductions " +
              format_double(report.derived_u1_from_reference_u0) + " (from reference) / " +
              format_double(report.derived_u1_from_matched_u0) + " (from matched)");

  return checks.failed() ? exit_code_for(ErrorClass::verification) : 0;
}

int cmd_verify(const CommonArgs& args) {
  const Scenario s = resolve_scenario(args);
  std::cout << "scenario " << s.name << " hash " << scenarios::scenario_hash_hex(s) << "\n";
  return s.family == Family::finite ? verify_finite(s) : verify_gaussian(s);
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const CommonArgs& args, bool separated, std::optional<std::uint64_t> ordinal,
               bool matching, const std::vector<double>& linear) {
  require(args.rollouts >= 1, ErrorClass::usage, "report: --rollouts must be at least 1");
  const Scenario s = resolve_scenario(args);
  const auto controller = make_controller(s, separated, ordinal, matching, linear);
  const harness::RunLog log = harness::collect_run_log(s, *controller, args.rollouts, args.seed);

  std::ostringstream out;
  out << "# report v1\n";
  out << "# tool_version," << kVersion << "\n";
  out << "# scenario_hash," << scenarios::scenario_hash_hex(s) << "\n";
  out << "# strategy," << controller->id() << "\n";
  out << "# seed," << args.seed << "\n";

  out << "# table,cost_vs_samples\n";
  out << "samples,actual_cost_mean,penalized_cost_mean\n";
  double actual_total = 0.0, penalized_total = 0.0;
  const std::vector<std::size_t> marks = checkpoints(args.rollouts);
  std::size_t next_mark = 0;
  for (std::size_t i = 0; i < log.rollouts.size(); ++i) {
    actual_total += log.rollouts[i].total_actual_cost();
    penalized_total += log.rollouts[i].total_penalized_cost();
    if (next_mark < marks.size() && i + 1 == marks[next_mark]) {
      const auto n = static_cast<double>(i + 1);
      out << (i + 1) << "," << format_double(actual_total / n) << ","
          << format_double(penalized_total / n) << "\n";
      ++next_mark;
    }
  }

  if (s.family == Family::finite) {
    learner::EmpiricalConditional emp(scenarios::scenario_hash(s), 0.0);
    const DeterministicStrategy strategy = cyclic_strategy(ModelView(s));
    const auto exact = exact_conditional(s, strategy);
    const harness::StrategyController cyclic(strategy, s.n_observations(), "cyclic");
    out << "# table,tv_vs_samples\n";
    out << "samples,weighted_tv\n";
    next_mark = 0;
    for (std::size_t i = 0; i < args.rollouts; ++i) {
      const auto traj =
          harness::run_parallel(s, cyclic, derive_stream(args.seed, i).next_u64());
      std::vector<std::size_t> u_full(traj.u.begin(), traj.u.end());
      std::vector<std::size_t> y_full(traj.y_hat.begin(), traj.y_hat.end());
      emp.record(u_full, y_full);
      if (next_mark < marks.size() && i + 1 == marks[next_mark]) {
        out << (i + 1) << "," << format_double(weighted_tv(s, emp, i + 1, exact)) << "\n";
        ++next_mark;
      }
    }
  }

  out << "# table,penalty_per_step\n";
  out << "t,mean_penalty\n";
  for (std::size_t t = 0; t < log.mean_penalty_per_step.size(); ++t)
    out << t << "," << format_double(log.mean_penalty_per_step[t]) << "\n";

  emit(args, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separated learning-and-control toolkit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::optional<std::size_t> grid_resolution;
  std::optional<std::uint64_t> ordinal;
  bool separated = false;
  bool matching = false;
  std::vector<double> linear;
  double alpha = 0.0;

  const auto add_common = [&](CLI::App* cmd, bool with_rollouts) {
    cmd->add_option("--scenario", args.scenario,
                    "scenario file path or builtin name (discrete_toy, lqg)")
        ->required();
    cmd->add_option("--seed", args.seed, "master random seed (default 0)");
    cmd->add_option("--beta", args.beta, "override the scenario's mismatch penalty weight");
    cmd->add_option("--out", args.out, "artifact file (default: stdout)");
    if (with_rollouts)
      cmd->add_option("--rollouts", args.rollouts, "number of rollouts (default 10000)");
  };
  const auto add_controller_options = [&](CLI::App* cmd) {
    cmd->add_flag("--separated", separated,
                  "finite: play the offline-solved separated strategy (exact filter)");
    cmd->add_option("--ordinal", ordinal, "finite: play the strategy with this ordinal");
    cmd->add_flag("--matching", matching, "gaussian: play the state-matching controller");
    cmd->add_option("--linear", linear,
                    "gaussian: linear coefficients a b c for u0=a*y0, u1=b*y1+c*y0")
        ->expected(3);
  };

  CLI::App* solve = app.add_subcommand("solve", "offline value/strategy computation");
  add_common(solve, false);
  solve->add_option("--grid-resolution", grid_resolution,
                    "finite: use a uniform belief grid of this resolution instead of the "
                    "exactly-reachable set");

  CLI::App* simulate = app.add_subcommand("simulate", "parallel model/actual rollouts");
  add_common(simulate, true);
  add_controller_options(simulate);

  CLI::App* learn = app.add_subcommand("learn", "empirical conditional-probability estimation");
  add_common(learn, true);
  learn->add_option("--smoothing-alpha", alpha, "additive smoothing pseudo-count (default 0)");

  CLI::App* verify = app.add_subcommand("verify", "oracle consistency checks");
  add_common(verify, false);

  CLI::App* report = app.add_subcommand("report", "analysis tables for external plotting");
  add_common(report, true);
  add_controller_options(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(args, grid_resolution);
    if (simulate->parsed()) return cmd_simulate(args, separated, ordinal, matching, linear);
    if (learn->parsed()) return cmd_learn(args, alpha);
    if (verify->parsed()) return cmd_verify(args);
    if (report->parsed()) return cmd_report(args, separated, ordinal, matching, linear);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
