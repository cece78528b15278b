#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include <sepctl/filter.hpp>
#include <sepctl/harness.hpp>
#include <sepctl/learner.hpp>
#include <sepctl/scenarios.hpp>
#include <sepctl/solver.hpp>
#include <sepctl/strategy.hpp>

using namespace sepctl;

namespace {

void bm_filter_update(benchmark::State& state) {
    Scenario s = scenarios::builtin_discrete_toy();
    ModelView view(s);
    filter::JointKernel kernel = filter::JointKernel::exact(s);
    filter::InformationState pi = filter::initial_information_state(view, 1);
    for (auto _ : state) {
        filter::InformationState next = filter::phi_update(view, kernel, pi, 1, 0);
        benchmark::DoNotOptimize(next);
    }
}
BENCHMARK(bm_filter_update);

void bm_dp_solve_exact_grid(benchmark::State& state) {
    Scenario s = scenarios::builtin_discrete_toy();
    ModelView view(s);
    filter::JointKernel kernel = filter::JointKernel::exact(s);
    solver::BeliefGrid grid = solver::BeliefGrid::exact_reachable(view, kernel);
    for (auto _ : state) {
        solver::DpResult dp = solver::dp_solve(s, grid);
        benchmark::DoNotOptimize(dp);
    }
}
BENCHMARK(bm_dp_solve_exact_grid);

void bm_dp_solve_uniform_lattice(benchmark::State& state) {
    Scenario s = scenarios::builtin_discrete_toy();
    ModelView view(s);
    solver::BeliefGrid grid = solver::BeliefGrid::uniform(view, state.range(0));
    for (auto _ : state) {
        solver::DpResult dp = solver::dp_solve(s, grid);
        benchmark::DoNotOptimize(dp);
    }
}
BENCHMARK(bm_dp_solve_uniform_lattice)->Arg(4)->Arg(8)->Arg(16);

void bm_exhaustive_oracle(benchmark::State& state) {
    Scenario s = scenarios::builtin_discrete_toy();
    for (auto _ : state) {
        solver::OracleResult oracle = solver::exhaustive_oracle(s);
        benchmark::DoNotOptimize(oracle);
    }
}
BENCHMARK(bm_exhaustive_oracle);

void bm_finite_rollout(benchmark::State& state) {
    Scenario s = scenarios::builtin_discrete_toy();
    harness::StrategyController controller(
        DeterministicStrategy::from_ordinal(ModelView(s), 27), s.n_observations(), "ordinal-27");
    std::uint64_t seed = 0;
    for (auto _ : state) {
        harness::Trajectory tr = harness::run_parallel(s, controller, seed++);
        benchmark::DoNotOptimize(tr);
    }
}
BENCHMARK(bm_finite_rollout);

void bm_gaussian_matching_rollout(benchmark::State& state) {
    Scenario s = scenarios::builtin_lqg();
    harness::MatchingController controller(s);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        harness::Trajectory tr = harness::run_parallel(s, controller, seed++);
        benchmark::DoNotOptimize(tr);
    }
}
BENCHMARK(bm_gaussian_matching_rollout);

void bm_monte_carlo_cost(benchmark::State& state) {
    Scenario s = scenarios::builtin_lqg();
    harness::LinearController controller(0.5, 0.0, -0.25, "reference");
    for (auto _ : state) {
        harness::CostEstimate est =
            harness::monte_carlo_cost(s, controller, state.range(0), 12);
        benchmark::DoNotOptimize(est);
    }
}
BENCHMARK(bm_monte_carlo_cost)->Arg(1000)->Arg(10000);

void bm_empirical_record_query(benchmark::State& state) {
    Scenario s = scenarios::builtin_discrete_toy();
    std::uint64_t hash = scenarios::scenario_hash(s);
    std::vector<std::size_t> us{0, 1};
    std::vector<std::size_t> yhs{1, 0, 1};
    for (auto _ : state) {
        learner::EmpiricalConditional emp(hash);
        for (int i = 0; i < 1000; ++i) emp.record(us, yhs);
        Distribution law = emp.query(us, s.observations);
        benchmark::DoNotOptimize(law);
    }
}
BENCHMARK(bm_empirical_record_query);

void bm_lqg_exact_cost(benchmark::State& state) {
    Scenario s = scenarios::builtin_lqg();
    double a = -1.5;
    for (auto _ : state) {
        double cost = solver::lqg_exact_actual_cost(s, a, -0.5, 0.0);
        benchmark::DoNotOptimize(cost);
    }
}
BENCHMARK(bm_lqg_exact_cost);

}  // namespace

BENCHMARK_MAIN();
