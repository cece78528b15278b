#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <sepctl/errors.hpp>
#include <sepctl/harness.hpp>
#include <sepctl/scenarios.hpp>
#include <sepctl/solver.hpp>
#include <sepctl/strategy.hpp>

#include "toy_oracle.hpp"

using namespace sepctl;

namespace {

struct OutOfSpaceController : harness::Controller {
    std::size_t decide(const harness::FiniteStep&) const override { return 99; }
    std::string id() const override { return "out-of-space"; }
};

struct NonFiniteController : harness::Controller {
    double decide(const harness::RealStep&) const override { return 1.0 / 0.0; }
    std::string id() const override { return "non-finite"; }
};

Scenario pinned_lqg() {
    Scenario s = scenarios::builtin_lqg();
    s.law.initial_g = {1.0, 0.0};
    s.law.disturbance_g = {{0.2, 0.0}, {0.0, 0.0}};
    s.law.initial_disturbance_covariance = 0.0;
    s.validate();
    return s;
}

}  // namespace

TEST_CASE("parallel rollouts are deterministic in the seed") {
    Scenario s = scenarios::builtin_discrete_toy();
    harness::StrategyController controller(
        DeterministicStrategy::from_ordinal(ModelView(s), 27), s.n_observations(), "ordinal-27");
    harness::Trajectory a = harness::run_parallel(s, controller, 7);
    harness::Trajectory b = harness::run_parallel(s, controller, 7);
    CHECK(a.x == b.x);
    CHECK(a.x_hat == b.x_hat);
    CHECK(a.u == b.u);
    CHECK(a.w == b.w);
    CHECK(a.z == b.z);
    harness::Trajectory c = harness::run_parallel(s, controller, 8);
    bool identical = a.x == c.x && a.z == c.z && a.w == c.w;
    CHECK_FALSE(identical);
}

TEST_CASE("both systems consume the same primitives and controls") {
    Scenario s = scenarios::builtin_discrete_toy();
    harness::StrategyController controller(
        DeterministicStrategy::from_ordinal(ModelView(s), 45), s.n_observations(), "ordinal-45");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        harness::Trajectory tr = harness::run_parallel(s, controller, seed);
        REQUIRE(tr.x.size() == 3);
        REQUIRE(tr.u.size() == 2);
        CHECK(tr.x[0] == tr.x_hat[0]);  // shared initial state
        for (int t = 0; t < 2; ++t) {
            CHECK(tr.x[t + 1] == s.f_model(t, tr.x[t], tr.u[t], tr.w[t]));
            CHECK(tr.x_hat[t + 1] == s.f_actual(t, tr.x_hat[t], tr.u[t], tr.w[t]));
        }
        for (int t = 0; t <= 2; ++t) {
            CHECK(tr.y[t] == s.h_observe(t, tr.x[t], tr.z[t]));
            CHECK(tr.y_hat[t] == s.h_observe(t, tr.x_hat[t], tr.z[t]));
        }
        CHECK(tr.penalty[0] == 0.0);
    }
}

TEST_CASE("identical dynamics keep the paths identical and transfer the cost") {
    Scenario s = scenarios::builtin_discrete_toy();
    s.actual_step = s.model_step;
    s.validate();
    harness::StrategyController controller(
        DeterministicStrategy::from_ordinal(ModelView(s), 63), s.n_observations(), "ordinal-63");
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        harness::Trajectory tr = harness::run_parallel(s, controller, seed);
        CHECK(tr.x == tr.x_hat);
        CHECK(tr.total_model_cost() == tr.total_actual_cost());
        harness::AuditReport audit = harness::audit_cost_transfer(s, tr);
        CHECK(audit.matched);
        CHECK(audit.costs_equal);
        CHECK(audit.transfer_holds);
        CHECK(audit.max_state_gap == 0.0);
    }
}

TEST_CASE("matching control pins both gaussian paths to the documented example") {
    Scenario s = pinned_lqg();
    harness::MatchingController controller(s);
    harness::Trajectory tr = harness::run_parallel(s, controller, 4);

    CHECK(tr.x_real[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tr.w_real[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(tr.u_real[0] == doctest::Approx(-0.8).epsilon(1e-10));
    CHECK(tr.x_real[1] == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(tr.x_hat_real[1] == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(tr.u_real[1] == doctest::Approx(-0.4 / 3.0).epsilon(1e-10));
    CHECK(tr.x_real[2] == doctest::Approx(0.8 / 3.0).epsilon(1e-10));
    CHECK(tr.x_hat_real[2] == doctest::Approx(0.8 / 3.0).epsilon(1e-10));

    harness::AuditReport audit = harness::audit_cost_transfer(s, tr);
    CHECK(audit.matched);
    CHECK(audit.costs_equal);
    CHECK(audit.transfer_holds);

    // The same holds under the random builtin law, rollout after rollout.
    Scenario r = scenarios::builtin_lqg();
    harness::MatchingController mc(r);
    for (std::uint64_t seed = 100; seed < 200; ++seed) {
        harness::Trajectory t2 = harness::run_parallel(r, mc, seed);
        harness::AuditReport a2 = harness::audit_cost_transfer(r, t2);
        CHECK(a2.max_state_gap <= 1e-9);
        CHECK(a2.transfer_holds);
    }

    // Matching needs distinct control gains and the gaussian family.
    Scenario same_gain = scenarios::builtin_lqg();
    same_gain.model_lin[1].b = 1.0;
    CHECK_THROWS_WITH_AS(harness::MatchingController{same_gain}, doctest::Contains("unsupported"),
                         Error);
    Scenario toy = scenarios::builtin_discrete_toy();
    CHECK_THROWS_AS(harness::MatchingController{toy}, Error);
}

TEST_CASE("deterministic zero primitives yield zero controls and zero cost") {
    Scenario s = scenarios::builtin_lqg();
    s.law.initial_g = {0.0, 0.0};
    s.law.disturbance_g = {{0.0, 0.0}, {0.0, 0.0}};
    s.law.initial_disturbance_covariance = 0.0;
    s.validate();
    harness::MatchingController controller(s);
    harness::Trajectory tr = harness::run_parallel(s, controller, 11);
    for (double u : tr.u_real) CHECK(u == 0.0);
    for (double x : tr.x_real) CHECK(x == 0.0);
    for (double x : tr.x_hat_real) CHECK(x == 0.0);
    CHECK(tr.total_actual_cost() == 0.0);
    CHECK(tr.total_penalized_cost() == 0.0);
}

TEST_CASE("controllers must stay inside the declared spaces") {
    Scenario s = scenarios::builtin_discrete_toy();
    OutOfSpaceController bad;
    CHECK_THROWS_WITH_AS(harness::run_parallel(s, bad, 0), doctest::Contains("domain"), Error);

    Scenario g = scenarios::builtin_lqg();
    NonFiniteController nan_controller;
    CHECK_THROWS_WITH_AS(harness::run_parallel(g, nan_controller, 0), doctest::Contains("domain"),
                         Error);

    // A controller for the wrong family hits the unsupported default.
    harness::StrategyController finite_only(
        DeterministicStrategy::from_ordinal(ModelView(s), 0), s.n_observations(), "ordinal-0");
    CHECK_THROWS_WITH_AS(harness::run_parallel(g, finite_only, 0),
                         doctest::Contains("unsupported"), Error);

    harness::LinearController wrong_family(0.5, 0.0, -0.25);
    CHECK_THROWS_AS(harness::run_parallel(s, wrong_family, 0), Error);
}

TEST_CASE("monte carlo estimates are deterministic and match the enumerated mean") {
    Scenario s = scenarios::builtin_discrete_toy();
    ModelView view(s);
    DeterministicStrategy st = DeterministicStrategy::from_ordinal(view, 27);
    harness::StrategyController controller(st, s.n_observations(), "ordinal-27");

    harness::CostEstimate a = harness::monte_carlo_cost(s, controller, 20000, 3);
    harness::CostEstimate b = harness::monte_carlo_cost(s, controller, 20000, 3);
    CHECK(a.actual_cost_mean == b.actual_cost_mean);
    CHECK(a.penalized_cost_mean == b.penalized_cost_mean);
    CHECK(a.rollouts == 20000);
    CHECK(a.actual_cost_se > 0.0);

    // Exact expectations from the test-side enumeration.
    double exact_actual = 0.0, exact_penalized = 0.0;
    for (const auto& atom : testoracle::atoms(s)) {
        auto costs = testoracle::closed_loop_costs(s, st, atom);
        exact_actual += atom.p * costs.actual;
        exact_penalized += atom.p * costs.penalized;
    }
    CHECK(std::abs(a.actual_cost_mean - exact_actual) <= 4.0 * a.actual_cost_se);
    CHECK(std::abs(a.penalized_cost_mean - exact_penalized) <= 4.0 * a.penalized_cost_se);

    // The estimate equals the mean of the run-log totals (same substreams).
    harness::RunLog log = harness::collect_run_log(s, controller, 500, 3);
    harness::CostEstimate c = harness::monte_carlo_cost(s, controller, 500, 3);
    CHECK(c.actual_cost_mean == doctest::Approx(log.mean_actual_cost).epsilon(1e-15));
    CHECK(c.penalized_cost_mean == doctest::Approx(log.mean_penalized_cost).epsilon(1e-15));

    // A cost-free problem estimates exactly zero with zero spread.
    Scenario free = scenarios::builtin_lqg();
    free.stage_quad = {{0.0, 0.0}, {0.0, 0.0}};
    free.terminal_quad = 0.0;
    free.validate();
    harness::LinearController lin(0.5, 0.0, -0.25, "reference");
    harness::CostEstimate z = harness::monte_carlo_cost(free, lin, 100, 1);
    CHECK(z.actual_cost_mean == 0.0);
    CHECK(z.actual_cost_se == 0.0);
}

TEST_CASE("gaussian monte carlo agrees with the closed-form cost") {
    Scenario s = scenarios::builtin_lqg();
    harness::LinearController reference(0.5, 0.0, -0.25, "reference");
    harness::CostEstimate est = harness::monte_carlo_cost(s, reference, 20000, 5);
    double exact = solver::lqg_exact_actual_cost(s, 0.5, 0.0, -0.25);
    CHECK(exact == doctest::Approx(1.9375).epsilon(1e-13));
    CHECK(std::abs(est.actual_cost_mean - exact) <= 4.0 * est.actual_cost_se);

    harness::LinearController optimum(-1.5, -0.5, 0.0, "oracle");
    harness::CostEstimate est2 = harness::monte_carlo_cost(s, optimum, 20000, 5);
    CHECK(std::abs(est2.actual_cost_mean - 0.1875) <= 4.0 * est2.actual_cost_se);
}

TEST_CASE("run logs serialize deterministically with full provenance") {
    Scenario s = scenarios::builtin_discrete_toy();
    harness::StrategyController controller(
        DeterministicStrategy::from_ordinal(ModelView(s), 5), s.n_observations(), "ordinal-5");
    harness::RunLog log = harness::collect_run_log(s, controller, 20, 9);
    CHECK(log.rollouts.size() == 20);
    CHECK(log.strategy_id == "ordinal-5");
    CHECK(log.mean_penalty_per_step.size() == 3);
    CHECK(log.mean_penalty_per_step[0] == 0.0);

    std::string text = harness::serialize_run_log(s, log);
    CHECK(text.rfind("# run-log v1", 0) == 0);
    CHECK(text.find(scenarios::scenario_hash_hex(s)) != std::string::npos);
    CHECK(text.find("# strategy,ordinal-5") != std::string::npos);
    CHECK(text.find("# seed,9") != std::string::npos);
    CHECK(text.find("rollout,t,x,x_hat,y,y_hat,u,w,z,c_model,c_actual,penalty") !=
          std::string::npos);
    CHECK(text.find("# rollouts,20") != std::string::npos);
    CHECK(text.find("# mean_actual_cost,") != std::string::npos);
    CHECK(text == harness::serialize_run_log(s, log));

    // One data row per (rollout, t); labels come from the scenario spaces.
    std::size_t data_rows = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty() && line[0] != '#' && line.rfind("rollout,", 0) != 0) ++data_rows;
    CHECK(data_rows == 20 * 3);
    CHECK(text.find(",s1,") != std::string::npos);
}
