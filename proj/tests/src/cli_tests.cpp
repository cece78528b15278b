#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <sepctl/scenarios.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "sepctl_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args) {
    fs::path out_path = work_dir() / "stdout.txt";
    fs::path err_path = work_dir() / "stderr.txt";
    std::string cmd = std::string(SEPCTL_BIN) + " " + args + " > " + out_path.string() + " 2> " +
                      err_path.string();
    int rc = std::system(cmd.c_str());
    RunResult result;
    result.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

}  // namespace

TEST_CASE("verify passes on both builtin scenarios") {
    RunResult toy = run_cli("verify --scenario discrete_toy");
    CAPTURE(toy.err);
    CHECK(toy.code == 0);
    CHECK(toy.out.find("pass") != std::string::npos);
    CHECK(toy.out.find("FAIL") == std::string::npos);

    RunResult lqg = run_cli("verify --scenario lqg");
    CAPTURE(lqg.err);
    CHECK(lqg.code == 0);
    CHECK(lqg.out.find("FAIL") == std::string::npos);
}

TEST_CASE("solve writes deterministic strategy tables") {
    fs::path a = work_dir() / "tables_a.txt";
    fs::path b = work_dir() / "tables_b.txt";
    CHECK(run_cli("solve --scenario discrete_toy --out " + a.string()).code == 0);
    CHECK(run_cli("solve --scenario discrete_toy --out " + b.string()).code == 0);
    std::string text = slurp(a);
    CHECK(text == slurp(b));  // byte-identical artifacts for identical commands
    CHECK(text.rfind("# value-strategy-table v1", 0) == 0);
    sepctl::Scenario s = sepctl::scenarios::builtin("discrete_toy");
    CHECK(text.find(sepctl::scenarios::scenario_hash_hex(s)) != std::string::npos);

    // The uniform-lattice variant also solves.
    RunResult lattice = run_cli("solve --scenario discrete_toy --grid-resolution 8");
    CHECK(lattice.code == 0);
    CHECK(lattice.out.rfind("# value-strategy-table v1", 0) == 0);
}

TEST_CASE("solve reports the scalar dual solution") {
    RunResult r = run_cli("solve --scenario lqg");
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("# stagewise-solution-report v1", 0) == 0);
    CHECK(r.out.find("reference_u0_coeff,0.5") != std::string::npos);
    CHECK(r.out.find("oracle_exact_cost,") != std::string::npos);
    CHECK(r.out.find("derived_u1_from_matched_u0,") != std::string::npos);
}

TEST_CASE("simulate produces reproducible run logs") {
    fs::path a = work_dir() / "log_a.txt";
    fs::path b = work_dir() / "log_b.txt";
    fs::path c = work_dir() / "log_c.txt";
    CHECK(run_cli("simulate --scenario discrete_toy --rollouts 50 --seed 4 --out " + a.string())
              .code == 0);
    CHECK(run_cli("simulate --scenario discrete_toy --rollouts 50 --seed 4 --out " + b.string())
              .code == 0);
    CHECK(run_cli("simulate --scenario discrete_toy --rollouts 50 --seed 5 --out " + c.string())
              .code == 0);
    std::string text = slurp(a);
    CHECK(text == slurp(b));
    CHECK(text != slurp(c));
    CHECK(text.rfind("# run-log v1", 0) == 0);
    CHECK(text.find("# seed,4") != std::string::npos);
    CHECK(text.find("# mean_actual_cost,") != std::string::npos);

    CHECK(run_cli("simulate --scenario discrete_toy --separated --rollouts 10").code == 0);
    CHECK(run_cli("simulate --scenario discrete_toy --ordinal 27 --rollouts 10").code == 0);
    CHECK(run_cli("simulate --scenario lqg --matching --rollouts 20").code == 0);
    CHECK(run_cli("simulate --scenario lqg --linear -1.5 -0.5 0 --rollouts 20").code == 0);
}

TEST_CASE("learn emits the sidecar and its convergence curve") {
    fs::path out = work_dir() / "sidecar.txt";
    RunResult r = run_cli("learn --scenario discrete_toy --rollouts 300 --seed 2 --out " +
                          out.string());
    CAPTURE(r.err);
    CHECK(r.code == 0);
    std::string text = slurp(out);
    CHECK(text.find("# empirical-conditional v1") != std::string::npos);
    CHECK(text.find("tv_vs_samples") != std::string::npos);

    CHECK(run_cli("learn --scenario lqg --rollouts 10").code == 1);  // finite-family only
}

TEST_CASE("report summarizes cost and learning against rollout count") {
    RunResult r = run_cli("report --scenario discrete_toy --rollouts 200 --seed 6");
    CAPTURE(r.err);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("# report v1", 0) == 0);
    CHECK(r.out.find("cost_vs_samples") != std::string::npos);
    CHECK(r.out.find("penalty_per_step") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").code == 2);                                      // missing subcommand
    CHECK(run_cli("simulate").code == 2);                              // missing --scenario
    CHECK(run_cli("simulate --scenario discrete_toy --rollouts 0").code == 2);
    CHECK(run_cli("frobnicate --scenario discrete_toy").code == 2);    // unknown subcommand
    RunResult unknown = run_cli("simulate --scenario no_such_builtin");
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("error[usage]") != std::string::npos);
    CHECK(run_cli("--help").code == 0);
}

TEST_CASE("parse errors exit with code 3") {
    fs::path bad = work_dir() / "bad_scenario.txt";
    sepctl::Scenario s = sepctl::scenarios::builtin("discrete_toy");
    std::string text = sepctl::scenarios::serialize(s);
    auto pos = text.find("0.6");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 3, "0.5");  // masses no longer sum to one
    {
        std::ofstream out(bad, std::ios::binary);
        out << text;
    }
    RunResult r = run_cli("simulate --scenario " + bad.string() + " --rollouts 5");
    CHECK(r.code == 3);
    CHECK(r.err.find("error[parse]") != std::string::npos);
}

TEST_CASE("scenario files behave exactly like their builtin twins") {
    fs::path file = work_dir() / "toy_copy.txt";
    sepctl::Scenario s = sepctl::scenarios::builtin("discrete_toy");
    {
        std::ofstream out(file, std::ios::binary);
        out << sepctl::scenarios::serialize(s);
    }
    RunResult from_file = run_cli("solve --scenario " + file.string());
    RunResult from_builtin = run_cli("solve --scenario discrete_toy");
    CHECK(from_file.code == 0);
    CHECK(from_file.out == from_builtin.out);
}

TEST_CASE("an invalid penalty override is rejected by validation") {
    RunResult r = run_cli("solve --scenario discrete_toy --beta -1");
    CHECK(r.code == 1);
    CHECK(r.err.find("error[") != std::string::npos);
}

TEST_CASE("beta override changes the solved tables") {
    RunResult base = run_cli("solve --scenario discrete_toy");
    RunResult heavy = run_cli("solve --scenario discrete_toy --beta 2");
    CHECK(base.code == 0);
    CHECK(heavy.code == 0);
    CHECK(base.out != heavy.out);
}
