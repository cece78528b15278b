#include "sepctl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <sstream>
#include <thread>

#include "sepctl/enumeration.hpp"
#include "sepctl/errors.hpp"
#include "sepctl/scenarios.hpp"
#include "sepctl/textio.hpp"
#include "sepctl/version.hpp"

namespace sepctl::solver {

namespace {

// Quantized fingerprint for deduplicating beliefs that are equal up to float
// summation noise.
std::vector<long long> belief_key(const filter::InformationState& pi) {
  std::vector<long long> key;
  key.reserve(pi.joint().size());
  for (double m : pi.joint()) key.push_back(std::llround(m * 1e12));
  return key;
}

}  // namespace

BeliefGrid BeliefGrid::exact_reachable(const ModelView& view,
                                       const filter::JointKernel& kernel) {
  require(view.family() == Family::finite, ErrorClass::unsupported,
          "BeliefGrid: finite family only");
  BeliefGrid grid;
  grid.delta_ = 1e-9;  // exact set: projection must land on a member
  const auto T = static_cast<std::size_t>(view.horizon());
  grid.points_.resize(T + 1);

  std::map<std::vector<long long>, std::size_t> seen;
  auto add = [&](std::size_t t, const filter::InformationState& pi) -> bool {
    auto [it, inserted] = seen.emplace(belief_key(pi), grid.points_[t].size());
    if (inserted) grid.points_[t].push_back(pi);
    return inserted;
  };

  for (std::size_t y0 = 0; y0 < view.n_observations(); ++y0) {
    bool possible = false;
    for (std::size_t x = 0; x < view.n_states(); ++x)
      if (view.law().initial->mass_at(x) > 0.0 &&
          filter::observation_likelihood(view, 0, y0, x) > 0.0)
        possible = true;
    if (possible) add(0, filter::initial_information_state(view, y0));
  }

  for (std::size_t t = 0; t < T; ++t) {
    seen.clear();
    for (const auto& pi : grid.points_[t])
      for (std::size_t u = 0; u < view.n_controls(); ++u)
        for (std::size_t y = 0; y < view.n_observations(); ++y) {
          try {
            add(t + 1, filter::phi_update(view, kernel, pi, y, u));
          } catch (const Error& e) {
            if (e.error_class() != ErrorClass::impossible_observation) throw;
          }
        }
    require(!grid.points_[t + 1].empty(), ErrorClass::invariant,
            "BeliefGrid: no reachable belief at t=" + std::to_string(t + 1));
  }
  return grid;
}

BeliefGrid BeliefGrid::uniform(const ModelView& view, std::size_t resolution) {
  require(view.family() == Family::finite, ErrorClass::unsupported,
          "BeliefGrid: finite family only");
  require(resolution >= 1, ErrorClass::usage, "BeliefGrid: resolution must be >= 1");
  const std::size_t dim = view.n_states() * view.n_states();
  double count = 1.0;  // C(resolution + dim - 1, dim - 1)
  for (std::size_t i = 1; i < dim; ++i)
    count *= static_cast<double>(resolution + i) / static_cast<double>(i);
  require(count <= 2e6, ErrorClass::too_large, "BeliefGrid: uniform lattice too large");

  std::vector<filter::InformationState> points;
  std::vector<std::size_t> composition(dim, 0);
  // Enumerate all ways to split `resolution` units of mass across dim cells.
  auto recurse = [&](auto&& self, std::size_t cell, std::size_t remaining) -> void {
    if (cell + 1 == dim) {
      composition[cell] = remaining;
      std::vector<double> joint(dim);
      for (std::size_t i = 0; i < dim; ++i)
        joint[i] = static_cast<double>(composition[i]) / static_cast<double>(resolution);
      points.emplace_back(0, view.n_states(), std::move(joint));
      return;
    }
    for (std::size_t k = 0; k <= remaining; ++k) {
      composition[cell] = k;
      self(self, cell + 1, remaining - k);
    }
  };
  recurse(recurse, 0, resolution);

  BeliefGrid grid;
  // Worst-case L1 rounding error of the lattice; projection inside it never
  // errors for a valid belief.
  grid.delta_ = static_cast<double>(dim) / static_cast<double>(resolution);
  const auto T = static_cast<std::size_t>(view.horizon());
  grid.points_.resize(T + 1);
  for (std::size_t t = 0; t <= T; ++t) {
    grid.points_[t].reserve(points.size());
    for (const auto& p : points)
      grid.points_[t].emplace_back(static_cast<int>(t), p.n_states(), p.joint());
  }
  return grid;
}

BeliefGrid::Projection BeliefGrid::project(const filter::InformationState& pi) const {
  const auto t = static_cast<std::size_t>(pi.t());
  require(t < points_.size(), ErrorClass::domain, "BeliefGrid: time outside horizon");
  const auto& candidates = points_[t];
  require(!candidates.empty(), ErrorClass::invariant, "BeliefGrid: empty level");
  Projection best{0, pi.l1_distance(candidates[0])};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double d = pi.l1_distance(candidates[i]);
    if (d < best.l1_distance) best = {i, d};
  }
  require(best.l1_distance <= delta_ + 1e-12, ErrorClass::resolution,
          "BeliefGrid: nearest representative at L1 distance " +
              format_double(best.l1_distance) + " exceeds resolution " + format_double(delta_));
  return best;
}

const std::vector<filter::InformationState>& BeliefGrid::points(int t) const {
  require(t >= 0 && static_cast<std::size_t>(t) < points_.size(), ErrorClass::domain,
          "BeliefGrid: time outside horizon");
  return points_[static_cast<std::size_t>(t)];
}

// ---------------------------------------------------------------------------

double penalized_stage_cost(const ModelView& view, int t, std::size_t x, std::size_t u,
                            std::size_t x_next, std::size_t x_hat_next) {
  const double d = view.state_value(x_next) - view.state_value(x_hat_next);
  return view.stage_cost(t, x, u) + view.beta() * d * d;
}

double penalized_stage_cost_lin(const ModelView& view, int t, double x, double u, double x_next,
                                double x_hat_next) {
  require(view.family() == Family::gaussian_linear, ErrorClass::unsupported,
          "penalized_stage_cost_lin: gaussian_linear family only");
  require(t >= 0 && t < view.horizon(), ErrorClass::domain,
          "penalized_stage_cost_lin: time outside horizon");
  const double d = x_next - x_hat_next;
  return view.stage_cost_lin(t, x, u) + view.beta() * d * d;
}

namespace {

struct Backup {
  double value;
  std::size_t action;
};

// One Bellman backup at a single grid point: exact expectation over the
// belief, the shared disturbance (through the joint kernel), and the next
// observation; the continuation value is read from the successor's slice at
// the realized actual coordinate.
Backup backup_point(const ModelView& view, const filter::JointKernel& kernel,
                    const BeliefGrid& grid, const ValueFunction& vf, int t,
                    const filter::InformationState& pi) {
  const std::size_t n = view.n_states();
  const std::size_t np = n * n;
  const bool last = t + 1 == view.horizon();
  Backup best{0.0, 0};
  bool first = true;

  for (std::size_t u = 0; u < view.n_controls(); ++u) {
    double immediate = 0.0;
    // weight[y][x_hat'] of each (next observation, next actual state) pair
    std::vector<std::vector<double>> weight(view.n_observations(),
                                            std::vector<double>(n, 0.0));
    for (std::size_t pair = 0; pair < np; ++pair) {
      const double mass = pi.joint()[pair];
      if (mass == 0.0) continue;
      const std::size_t x = pair / n;
      immediate += mass * view.stage_cost(t, x, u);
      for (std::size_t pair2 = 0; pair2 < np; ++pair2) {
        const double k = kernel.prob(t, u, pair, pair2);
        if (k == 0.0) continue;
        const std::size_t x2 = pair2 / n;
        const std::size_t xh2 = pair2 % n;
        const double dv = view.state_value(x2) - view.state_value(xh2);
        immediate += mass * k * view.beta() * dv * dv;
        for (std::size_t y = 0; y < view.n_observations(); ++y) {
          const double lik = filter::observation_likelihood(view, t + 1, y, x2);
          if (lik != 0.0) weight[y][xh2] += mass * k * lik;
        }
      }
    }

    double future = 0.0;
    for (std::size_t y = 0; y < view.n_observations(); ++y) {
      double py = 0.0;
      for (std::size_t xh2 = 0; xh2 < n; ++xh2) py += weight[y][xh2];
      if (py <= 0.0) continue;
      const auto next = filter::phi_update(view, kernel, pi, y, u);
      const std::size_t g = grid.project(next).index;
      if (last) {
        future += py * vf.terminal[g];
      } else {
        const auto& slice = vf.value[static_cast<std::size_t>(t) + 1][g];
        for (std::size_t xh2 = 0; xh2 < n; ++xh2) future += weight[y][xh2] * slice[xh2];
      }
    }

    const double q = immediate + future;
    if (first || q < best.value) {  // strict: ties keep the lowest control index
      best = {q, u};
      first = false;
    }
  }
  return best;
}

}  // namespace

DpResult dp_solve(const ModelView& view, const filter::JointKernel& kernel,
                  const BeliefGrid& grid, std::uint64_t scenario_hash) {
  require(view.family() == Family::finite, ErrorClass::unsupported,
          "dp_solve: finite family only (the gaussian path is closed-form)");
  const int T = view.horizon();
  require(grid.horizon() == T, ErrorClass::usage, "dp_solve: grid horizon mismatch");
  const std::size_t n = view.n_states();

  DpResult result;
  result.strategy.grid_based = true;
  result.strategy.scenario_hash = scenario_hash;
  result.strategy.grid_delta = grid.delta();
  result.strategy.beta = view.beta();

  const auto& top = grid.points(T);
  result.value.terminal.resize(top.size());
  for (std::size_t g = 0; g < top.size(); ++g) {
    double v = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      double px = 0.0;
      for (std::size_t xh = 0; xh < n; ++xh) px += top[g].at(x, xh);
      v += px * view.terminal_cost(x);
    }
    result.value.terminal[g] = v;
  }

  result.value.value.resize(static_cast<std::size_t>(T));
  result.strategy.action.resize(static_cast<std::size_t>(T));
  for (int t = T - 1; t >= 0; --t) {
    const auto& level = grid.points(t);
    auto& values = result.value.value[static_cast<std::size_t>(t)];
    auto& actions = result.strategy.action[static_cast<std::size_t>(t)];
    values.assign(level.size(), std::vector<double>(n, 0.0));
    actions.assign(level.size(), std::vector<std::size_t>(n, 0));

    auto solve_range = [&](std::size_t begin, std::size_t end) {
      for (std::size_t g = begin; g < end; ++g) {
        const Backup b = backup_point(view, kernel, grid, result.value, t, level[g]);
        // The backup conditions on the full joint belief, so every
        // actual-realization slice receives the same value and argmin.
        for (std::size_t xh = 0; xh < n; ++xh) {
          values[g][xh] = b.value;
          actions[g][xh] = b.action;
        }
      }
    };

    const std::size_t workers = std::min<std::size_t>(std::thread::hardware_concurrency(),
                                                      level.size() / 32);
    if (workers >= 2) {
      std::vector<std::future<void>> tasks;
      const std::size_t chunk = (level.size() + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(level.size(), begin + chunk);
        if (begin < end)
          tasks.push_back(std::async(std::launch::async, solve_range, begin, end));
      }
      for (auto& task : tasks) task.get();
    } else {
      solve_range(0, level.size());
    }
  }
  return result;
}

DpResult dp_solve(const Scenario& s, const BeliefGrid& grid) {
  return dp_solve(ModelView(s), filter::JointKernel::exact(s), grid,
                  scenarios::scenario_hash(s));
}

double expected_initial_value(const ModelView& view, const BeliefGrid& grid,
                              const ValueFunction& vf) {
  require(!vf.value.empty(), ErrorClass::invariant,
          "expected_initial_value: empty value function");
  double total = 0.0;
  for (std::size_t y0 = 0; y0 < view.n_observations(); ++y0) {
    double p_y0 = 0.0;
    for (std::size_t x = 0; x < view.n_states(); ++x)
      p_y0 += filter::observation_likelihood(view, 0, y0, x) * view.law().initial->mass_at(x);
    if (p_y0 <= 0.0) continue;
    const filter::InformationState pi = filter::initial_information_state(view, y0);
    const BeliefGrid::Projection projection = grid.project(pi);
    total += p_y0 * vf.value[0][projection.index][pi.actual_mode()];
  }
  return total;
}

OracleResult exhaustive_oracle(const Scenario& s) {
  require(s.family == Family::finite, ErrorClass::unsupported,
          "exhaustive_oracle: finite family only");
  const ModelView view(s);
  const std::uint64_t total = DeterministicStrategy::count(view);
  const auto atoms = enumerate_atoms(s);

  OracleResult result;
  result.strategies_enumerated = total;
  result.all_costs.resize(total);
  for (std::uint64_t k = 0; k < total; ++k) {
    const DeterministicStrategy g = DeterministicStrategy::from_ordinal(view, k);
    double cost = 0.0;
    for (const Atom& atom : atoms)
      cost += atom.prob * trace_penalized_cost(s, closed_loop_trace(s, g, atom));
    result.all_costs[k] = cost;
    if (k == 0 || cost < result.min_cost) {  // ties keep the lowest ordinal
      result.min_cost = cost;
      result.best_ordinal = k;
      result.best_strategy = g;
    }
  }
  return result;
}

double matching_control(const ModelView& view, int t, double x, double w, double x_hat_target) {
  require(view.family() == Family::gaussian_linear, ErrorClass::unsupported,
          "matching_control: gaussian_linear family only");
  require(t >= 0 && t < view.horizon(), ErrorClass::domain,
          "matching_control: time outside horizon");
  const LinearStep step = view.model_lin_step(t);
  require(step.b != 0.0, ErrorClass::unsupported,
          "matching_control: model control coefficient is zero (not invertible)");
  return (x_hat_target - step.a * x - step.c * w) / step.b;
}

std::string serialize_tables(const ModelView& view, const DpResult& result) {
  std::ostringstream out;
  out << "# value-strategy-table v1\n";
  out << "# tool_version," << kVersion << "\n";
  out << "# scenario_hash," << to_hex64(result.strategy.scenario_hash) << "\n";
  out << "# grid_delta," << format_double(result.strategy.grid_delta) << "\n";
  out << "# beta," << format_double(result.strategy.beta) << "\n";
  out << "t,grid_index,x_hat,value,control\n";
  const auto& states = view.states().labels;
  const auto& controls = view.controls().labels;
  for (std::size_t t = 0; t < result.value.value.size(); ++t)
    for (std::size_t g = 0; g < result.value.value[t].size(); ++g)
      for (std::size_t xh = 0; xh < result.value.value[t][g].size(); ++xh)
        out << t << "," << g << "," << states[xh] << ","
            << format_double(result.value.value[t][g][xh]) << ","
            << controls[result.strategy.action[t][g][xh]] << "\n";
  for (std::size_t g = 0; g < result.value.terminal.size(); ++g)
    out << result.value.value.size() << "," << g << ",-,"
        << format_double(result.value.terminal[g]) << ",-\n";
  return out.str();
}

}  // namespace sepctl::solver
