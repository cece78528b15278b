#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include <sepctl/errors.hpp>
#include <sepctl/scenario.hpp>
#include <sepctl/scenarios.hpp>

using namespace sepctl;

namespace {

// Counts (t, x, u, w) entries where the declared model and the actual system
// disagree on the next state.
std::size_t divergent_entries(const Scenario& s) {
    std::size_t count = 0;
    for (int t = 0; t < s.horizon; ++t)
        for (std::size_t x = 0; x < s.n_states(); ++x)
            for (std::size_t u = 0; u < s.n_controls(); ++u)
                for (std::size_t w = 0; w < s.disturbances.size(); ++w)
                    if (s.f_model(t, x, u, w) != s.f_actual(t, x, u, w)) ++count;
    return count;
}

}  // namespace

TEST_CASE("builtin discrete toy has the documented shape") {
    Scenario s = scenarios::builtin_discrete_toy();
    CHECK_NOTHROW(s.validate());
    CHECK(s.family == Family::finite);
    CHECK(s.horizon == 2);
    CHECK(s.beta == 1.0);
    CHECK(s.n_states() == 2);
    CHECK(s.n_controls() == 2);
    CHECK(s.n_observations() == 2);
    CHECK(s.disturbances.size() == 2);
    CHECK(s.noises.size() == 2);

    // Deterministic initial state; disturbance and noise laws as documented.
    REQUIRE(s.law.initial.has_value());
    CHECK(s.law.initial->mass_at(1) == 1.0);
    CHECK(s.law.disturbance[0].mass_at(0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(s.law.noise[0].mass_at(0) == doctest::Approx(0.9).epsilon(1e-15));

    // Model and actual dynamics differ in exactly one table entry.
    CHECK(divergent_entries(s) == 1);
    CHECK(s.f_model(0, 1, 1, 1) == 1);  // the divergent entry: model holds state
    CHECK(s.f_actual(0, 1, 1, 1) == 0); // actual follows the shared additive rule

    // Observation: identity under the "keep" noise, flipped otherwise.
    CHECK(s.h_observe(0, 0, 0) == 0);
    CHECK(s.h_observe(0, 0, 1) == 1);
    CHECK(s.h_observe(1, 1, 0) == 1);
    CHECK(s.h_observe(1, 1, 1) == 0);

    // Costs: zero stages, terminal charges state s1.
    CHECK(s.stage_cost(0, 0, 0) == 0.0);
    CHECK(s.stage_cost(1, 1, 1) == 0.0);
    CHECK(s.terminal_cost(0) == 0.0);
    CHECK(s.terminal_cost(1) == 1.0);
    CHECK(s.state_value(0) == 0.0);
    CHECK(s.state_value(1) == 1.0);
}

TEST_CASE("builtin lqg matches its documented coefficients") {
    Scenario s = scenarios::builtin_lqg();
    CHECK_NOTHROW(s.validate());
    CHECK(s.family == Family::gaussian_linear);
    CHECK(s.horizon == 2);
    CHECK(s.beta == 1.0);

    // Model dynamics: x1 = 2 x0 + 3 u0 + 4 w0, x2 = 2 x1 + 4 u1.
    CHECK(s.f_model_lin(0, 1.0, 0.0, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.f_model_lin(1, 0.4, -0.8, 0.0) == doctest::Approx(-2.4).epsilon(1e-14));
    // Actual dynamics: x1 = x0 + u0 + w0, x2 = x1 + u1 + w1.
    CHECK(s.f_actual_lin(0, 1.0, 0.5, 0.0) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(s.f_actual_lin(0, 1.0, -0.8, 0.2) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(s.f_actual_lin(1, 0.4, 0.0, 0.0) == doctest::Approx(0.4).epsilon(1e-15));

    // Observations are exact: gain 0 and zero-variance noise at every step.
    for (int t = 0; t <= 2; ++t) {
        CHECK(s.observe_gain[t] == 0.0);
        CHECK(s.law.noise_g[t].variance == 0.0);
        CHECK(s.h_observe_lin(t, 1.25, 3.0) == doctest::Approx(1.25).epsilon(1e-15));
    }

    // Cost: only r_1 = 1/2 and q_T = 1/2 are charged, so the total at
    // x2 = 1, u1 = 1 is (1/2)(x2^2 + u1^2) = 1.
    CHECK(s.stage_cost_lin(0, 5.0, 7.0) == 0.0);
    CHECK(s.stage_cost_lin(1, 0.0, 1.0) + s.terminal_cost_lin(1.0) ==
          doctest::Approx(1.0).epsilon(1e-15));

    // Correlated initial pair, unit variances, documented reference solution.
    CHECK(s.law.initial_g.variance == 1.0);
    CHECK(s.law.disturbance_g[0].variance == 1.0);
    CHECK(s.law.initial_disturbance_covariance == doctest::Approx(0.5).epsilon(1e-15));
    REQUIRE(s.reference_coefficients.size() == 2);
    CHECK(s.reference_coefficients[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.reference_coefficients[1] == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("builtin lookup by id") {
    CHECK(scenarios::builtin("discrete_toy").name == scenarios::builtin_discrete_toy().name);
    CHECK(scenarios::builtin("lqg").family == Family::gaussian_linear);
    CHECK_THROWS_WITH_AS(scenarios::builtin("nope"), doctest::Contains("usage"), Error);
}

TEST_CASE("mismatch penalty is beta times the squared value gap") {
    Scenario s = scenarios::builtin_discrete_toy();
    CHECK(mismatch_penalty(s, 0, 0) == 0.0);
    CHECK(mismatch_penalty(s, 1, 1) == 0.0);
    CHECK(mismatch_penalty(s, 0, 1) == doctest::Approx(1.0).epsilon(1e-15));
    s.beta = 2.5;
    CHECK(mismatch_penalty(s, 1, 0) == doctest::Approx(2.5).epsilon(1e-15));

    Scenario g = scenarios::builtin_lqg();
    CHECK(mismatch_penalty_lin(g, 0.7, 0.4) == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("cost dispatch enforces the control/terminal boundary") {
    Scenario s = scenarios::builtin_discrete_toy();
    CHECK(cost(s, 0, 1, std::size_t{0}) == 0.0);
    CHECK(cost(s, 2, 1, std::nullopt) == 1.0);
    CHECK_THROWS_AS((void)cost(s, 2, 1, std::size_t{0}), Error);   // control past the horizon
    CHECK_THROWS_AS((void)cost(s, 0, 1, std::nullopt), Error);     // missing control
    Scenario g = scenarios::builtin_lqg();
    CHECK(cost_lin(g, 1, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(cost_lin(g, 2, 1.0, std::nullopt) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS((void)cost_lin(g, 2, 1.0, 1.0), Error);
}

TEST_CASE("evaluation accessors reject out-of-range arguments") {
    Scenario s = scenarios::builtin_discrete_toy();
    CHECK_THROWS_AS((void)s.f_model(2, 0, 0, 0), Error);   // t beyond T-1
    CHECK_THROWS_AS((void)s.f_model(0, 5, 0, 0), Error);   // bad state
    CHECK_THROWS_AS((void)s.h_observe(3, 0, 0), Error);    // t beyond T
    Scenario g = scenarios::builtin_lqg();
    CHECK_THROWS_AS((void)g.f_model(0, 0, 0, 0), Error);   // finite accessor on gaussian family
    CHECK_THROWS_AS((void)s.f_model_lin(0, 0.0, 0.0, 0.0), Error);
}

TEST_CASE("validation catches structural defects") {
    Scenario s = scenarios::builtin_discrete_toy();
    s.model_step[0].next[0][0][0] = 7;  // dangling state index
    CHECK_THROWS_AS(s.validate(), Error);

    Scenario s2 = scenarios::builtin_discrete_toy();
    s2.beta = -1.0;
    CHECK_THROWS_AS(s2.validate(), Error);

    Scenario s3 = scenarios::builtin_discrete_toy();
    s3.law.noise.pop_back();  // noise laws must cover t = 0..T
    CHECK_THROWS_AS(s3.validate(), Error);

    Scenario g = scenarios::builtin_lqg();
    g.law.initial_disturbance_covariance = 2.0;  // exceeds sqrt(var*var)
    CHECK_THROWS_AS(g.validate(), Error);

    Scenario g2 = scenarios::builtin_lqg();
    g2.law.initial_g.variance = -0.5;
    CHECK_THROWS_AS(g2.validate(), Error);
}

TEST_CASE("serialize/parse round-trips both builtins byte-for-byte") {
    for (const char* id : {"discrete_toy", "lqg"}) {
        CAPTURE(id);
        Scenario s = scenarios::builtin(id);
        std::string text = scenarios::serialize(s);
        Scenario back = scenarios::parse(text, "roundtrip");
        CHECK(scenarios::serialize(back) == text);
        CHECK(scenarios::scenario_hash(back) == scenarios::scenario_hash(s));
    }
}

TEST_CASE("distinct scenarios hash differently") {
    Scenario a = scenarios::builtin_discrete_toy();
    Scenario b = a;
    b.beta = 2.0;
    CHECK(scenarios::scenario_hash(a) != scenarios::scenario_hash(b));
    CHECK(scenarios::scenario_hash_hex(a).size() == 16);
}

TEST_CASE("parse reports the offending line for malformed input") {
    Scenario s = scenarios::builtin_discrete_toy();
    std::string text = scenarios::serialize(s);

    SUBCASE("a probability mass vector that does not sum to one") {
        auto pos = text.find("0.6");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 3, "0.5");  // disturbance masses now total 0.9
        try {
            scenarios::parse(text, "bad_input");
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.error_class() == ErrorClass::parse);
            CHECK(std::string(e.what()).find("bad_input") != std::string::npos);
        }
    }

    SUBCASE("a missing required section") {
        auto pos = text.find("[actual]");
        REQUIRE(pos != std::string::npos);
        auto end = text.find('[', pos + 1);
        REQUIRE(end != std::string::npos);
        text.erase(pos, end - pos);
        try {
            scenarios::parse(text, "bad_input");
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.error_class() == ErrorClass::parse);
            CHECK(std::string(e.what()).find("actual") != std::string::npos);
        }
    }

    SUBCASE("garbage where a number is expected") {
        auto pos = text.find("0.6");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 3, "abc");
        CHECK_THROWS_AS(scenarios::parse(text, "bad_input"), Error);
    }
}

TEST_CASE("load_file reads what serialize wrote") {
    Scenario s = scenarios::builtin_lqg();
    std::string path = "roundtrip_scenario_tmp.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << scenarios::serialize(s);
    }
    Scenario back = scenarios::load_file(path);
    CHECK(scenarios::scenario_hash(back) == scenarios::scenario_hash(s));
    std::remove(path.c_str());
    CHECK_THROWS_AS(scenarios::load_file("definitely_missing_file.txt"), Error);
}
