#include <doctest.h>

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <sepctl/errors.hpp>
#include <sepctl/filter.hpp>
#include <sepctl/harness.hpp>
#include <sepctl/learner.hpp>
#include <sepctl/primitives.hpp>
#include <sepctl/scenarios.hpp>
#include <sepctl/solver.hpp>

using namespace sepctl;

TEST_CASE("observation history enumeration is lexicographic and bounded") {
    auto histories = learner::enumerate_observation_histories(2, 3);
    REQUIRE(histories.size() == 8);
    CHECK(histories.front() == std::vector<std::size_t>{0, 0, 0});
    CHECK(histories[1] == std::vector<std::size_t>{0, 0, 1});  // earliest step most significant
    CHECK(histories.back() == std::vector<std::size_t>{1, 1, 1});
    CHECK(learner::enumerate_observation_histories(2, 0) ==
          std::vector<std::vector<std::size_t>>{{}});
    CHECK_THROWS_WITH_AS(learner::enumerate_observation_histories(10, 7),
                         doctest::Contains("too-large"), Error);
}

TEST_CASE("history labels join with '+' and name the empty history '.'") {
    Scenario s = scenarios::builtin_discrete_toy();
    CHECK(learner::history_label(s.observations, {0, 1, 1}) == "o0+o1+o1");
    CHECK(learner::history_label(s.observations, {}) == ".");
}

TEST_CASE("recording and querying the empirical conditional") {
    Scenario s = scenarios::builtin_discrete_toy();
    std::uint64_t hash = scenarios::scenario_hash(s);
    learner::EmpiricalConditional emp(hash);

    emp.record({0}, {1, 1});
    emp.record({0}, {1, 1});
    emp.record({0}, {1, 0});
    CHECK(emp.records() == 3);
    CHECK(emp.total({0}) == 3);
    CHECK(emp.total({1}) == 0);

    Distribution law = emp.query({0}, s.observations);
    REQUIRE(law.support().size() == 4);  // all histories of length 2
    CHECK(law.mass_of("o1+o1") == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(law.mass_of("o1+o0") == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(law.mass_of("o0+o0") == 0.0);

    // Repeating the same record N times cannot move the normalized law.
    learner::EmpiricalConditional one(hash), many(hash);
    one.record({1}, {0, 1});
    for (int i = 0; i < 50; ++i) many.record({1}, {0, 1});
    CHECK(one.query({1}, s.observations).max_abs_difference(many.query({1}, s.observations)) ==
          0.0);

    CHECK_THROWS_AS(emp.record({0}, {1}), Error);  // history length contract
    CHECK_THROWS_WITH_AS(emp.query({1}, s.observations), doctest::Contains("insufficient-data"),
                         Error);
}

TEST_CASE("additive smoothing spreads pseudo-counts over the history space") {
    Scenario s = scenarios::builtin_discrete_toy();
    std::uint64_t hash = scenarios::scenario_hash(s);
    learner::EmpiricalConditional emp(hash, 0.5);
    emp.record({}, {0});
    emp.record({}, {0});
    emp.record({}, {0});
    emp.record({}, {1});
    // Counts (3, 1) with alpha 0.5 over 2 histories: (3.5, 1.5) / 5.
    Distribution law = emp.query({}, s.observations);
    CHECK(law.mass_of("o0") == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(law.mass_of("o1") == doctest::Approx(0.3).epsilon(1e-15));

    // An unseen key becomes uniform instead of an error.
    Distribution unseen = emp.query({0, 1}, s.observations);
    for (std::size_t i = 0; i < unseen.support().size(); ++i)
        CHECK(unseen.mass_at(i) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("the sidecar format round-trips the table exactly") {
    Scenario s = scenarios::builtin_discrete_toy();
    std::uint64_t hash = scenarios::scenario_hash(s);
    learner::EmpiricalConditional emp(hash, 0.25);
    emp.record({}, {1});
    emp.record({0}, {1, 1});
    emp.record({0}, {1, 0});
    emp.record({0, 1}, {1, 0, 0});
    std::string text = emp.serialize(s.controls, s.observations);
    CHECK(text.rfind("# empirical-conditional v1", 0) == 0);
    CHECK(text.find(scenarios::scenario_hash_hex(s)) != std::string::npos);
    CHECK(text.find("a0,o1+o1,1") != std::string::npos);
    CHECK(text.find(".,o1,1") != std::string::npos);
    CHECK(text.find("a0+a1,o1+o0+o0,1") != std::string::npos);

    learner::EmpiricalConditional back =
        learner::EmpiricalConditional::parse(text, s.controls, s.observations);
    CHECK(back.records() == emp.records());
    CHECK(back.alpha() == emp.alpha());
    CHECK(back.scenario_hash() == hash);
    CHECK(back.serialize(s.controls, s.observations) == text);

    CHECK_THROWS_AS(
        learner::EmpiricalConditional::parse("not a sidecar", s.controls, s.observations), Error);
    CHECK_THROWS_AS(learner::EmpiricalConditional::parse(
                        "# empirical-conditional v1\nu,y,count\na0,o1,1\n", s.controls,
                        s.observations),
                    Error);  // missing hash/alpha headers
}

TEST_CASE("tv distance on shared supports") {
    Distribution p({"a", "b"}, {0.5, 0.5});
    Distribution q({"a", "b"}, {0.9, 0.1});
    CHECK(learner::tv_distance(p, p) == 0.0);
    CHECK(learner::tv_distance(p, q) == doctest::Approx(0.4).epsilon(1e-15));
    Distribution pa({"a", "b"}, {1.0, 0.0});
    Distribution pb({"a", "b"}, {0.0, 1.0});
    CHECK(learner::tv_distance(pa, pb) == doctest::Approx(1.0).epsilon(1e-15));
    Distribution other({"a", "c"}, {0.5, 0.5});
    CHECK_THROWS_AS(learner::tv_distance(p, other), Error);
}

TEST_CASE("assembling the learned information state defers to the factor form") {
    Scenario s = scenarios::builtin_discrete_toy();
    std::uint64_t hash = scenarios::scenario_hash(s);
    learner::EmpiricalConditional emp(hash);
    emp.record({1}, {1, 0});
    emp.record({1}, {1, 0});
    emp.record({1}, {1, 1});
    emp.record({1}, {0, 0});

    Distribution model_belief({"s0", "s1"}, {0.3, 0.7});
    std::vector<Distribution> beliefs;
    for (int i = 0; i < 4; ++i)
        beliefs.push_back(Distribution({"s0", "s1"}, {0.25 * i / 1.5, 1.0 - 0.25 * i / 1.5}));

    learner::LearnedInformationState learned =
        learner::learned_information_state(emp, 1, {1}, s.observations, model_belief, beliefs);
    CHECK(learned.sample_count == 4);
    CHECK(learned.scenario_hash == hash);
    CHECK(learned.state.t() == 1);

    // Identical to assembling the same factors by hand.
    Distribution weights = emp.query({1}, s.observations);
    std::vector<double> w(weights.support().size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weights.mass_at(i);
    filter::InformationState direct = filter::factorize(1, model_belief, beliefs, w);
    CHECK(learned.state.l1_distance(direct) == 0.0);
}

TEST_CASE("exact and learned providers agree on the toy at scale") {
    Scenario s = scenarios::builtin_discrete_toy();
    auto exact = learner::exact_provider(s);
    CHECK(exact->scenario_hash() == scenarios::scenario_hash(s));

    // Drive both systems open-loop (u = a1 at both steps) and record the
    // actual-side histories; the learned provider should then reconstruct
    // nearly the exact information state.
    learner::EmpiricalConditional emp(scenarios::scenario_hash(s));
    Rng rng(31);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        PrimitiveDraw d = sample_primitives(s, rng);
        std::size_t xh = d.x0;
        std::vector<std::size_t> yh{s.h_observe(0, xh, d.z[0])};
        emp.record({}, yh);
        xh = s.f_actual(0, xh, 1, d.w[0]);
        yh.push_back(s.h_observe(1, xh, d.z[1]));
        emp.record({1}, yh);
        xh = s.f_actual(1, xh, 1, d.w[1]);
        yh.push_back(s.h_observe(2, xh, d.z[2]));
        emp.record({1, 1}, yh);
    }
    auto learned = learner::learned_provider(s, emp, filter::MarkovKernel::actual_exact(s));

    // Compare along a realized history (y0 = o1, y1 = o1 under u0 = a1, then
    // y2 = o0 under u1 = a1).
    std::vector<std::size_t> ys{1, 1, 0};
    std::vector<std::size_t> us{1, 1};
    for (int t = 0; t <= 2; ++t) {
        std::vector<std::size_t> yh(ys.begin(), ys.begin() + t + 1);
        std::vector<std::size_t> uh(us.begin(), us.begin() + t);
        filter::InformationState a = exact->state(t, yh, yh, uh);
        filter::InformationState b = learned->state(t, yh, yh, uh);
        CHECK(a.l1_distance(b) <= 0.05);
    }
}

TEST_CASE("instantiated strategies check provenance and read the table") {
    Scenario s = scenarios::builtin_discrete_toy();
    ModelView view(s);
    filter::JointKernel kernel = filter::JointKernel::exact(s);
    solver::BeliefGrid grid = solver::BeliefGrid::exact_reachable(view, kernel);
    solver::DpResult dp = solver::dp_solve(s, grid);

    std::shared_ptr<const learner::InformationStateProvider> provider = learner::exact_provider(s);
    auto controller = learner::instantiate_strategy(dp.strategy, grid, provider);
    CHECK(controller->id() == "separated");

    // At t = 0 the toy's information state is the point mass at (s1, s1), so
    // the controller must emit exactly the stored action for that grid point.
    std::vector<std::size_t> y0{1}, yh0{1}, u0;
    harness::FiniteStep step{0, y0, yh0, u0, 1, 1, 0};
    filter::InformationState pi0 = filter::initial_information_state(view, 1);
    auto proj = grid.project(pi0);
    CHECK(controller->decide(step) == dp.strategy.action[0][proj.index][pi0.actual_mode()]);

    solver::SeparatedStrategy foreign = dp.strategy;
    foreign.scenario_hash ^= 0xdeadbeef;
    CHECK_THROWS_WITH_AS(learner::instantiate_strategy(foreign, grid, provider),
                         doctest::Contains("invariant"), Error);

    solver::SeparatedStrategy parametric = dp.strategy;
    parametric.grid_based = false;
    CHECK_THROWS_WITH_AS(learner::instantiate_strategy(parametric, grid, provider),
                         doctest::Contains("unsupported"), Error);
}
