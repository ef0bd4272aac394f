#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nlcl/errors.hpp"
#include "nlcl/experiment.hpp"

using namespace nlcl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("nlcl_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string fan_config(const fs::path& out, const std::string& extra = "") {
    return R"({
      "model": "burgers_indicator",
      "initial": {"atoms": [{"x": 0, "mass": 1}]},
      "N": 4,
      "T": 1.0,
      "snapshot_times": [1.0],
      "output_dir": ")" + out.string() + "\"" + extra + "}";
}

}  // namespace

TEST_CASE("config parsing reports the offending field") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"model":"burgers_indicator",
        "initial":{"atoms":[{"x":0,"mass":1}]}, "N":4})"),
                         doctest::Contains("\"T\""), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"initial":{"atoms":[{"x":0,"mass":1}]},
        "N":4, "T":1})"),
                         doctest::Contains("\"model\""), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"model":"burgers_indicator",
        "initial":{"atoms":[{"x":0,"mass":0.25}]}, "N":4, "T":1})"),
                         doctest::Contains("\"initial\""), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model":"burgers_indicator",
        "initial":{"atoms":[{"x":0,"mass":1}]}, "N":4, "T":1, "mode":"euler"})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model":"burgers_indicator",
        "initial":{"atoms":[{"x":0,"mass":1}]}, "N":4, "T":1,
        "snapshot_times":[0.5, 2.0]})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    // overrides apply to table kernels only
    CHECK_THROWS_AS(parse_config(R"({"model":{"name":"exponential","lambda":2},
        "initial":{"atoms":[{"x":0,"mass":1}]}, "N":4, "T":1})"),
                    ConfigError);
}

TEST_CASE("table kernel models load from config") {
    const ExperimentConfig config = parse_config(R"({
        "model": {"name": "table",
                  "kernel_table": {"breakpoints": [-2.0, 0.0], "values": [0.5, 1.0]},
                  "lip_V": 0.25},
        "initial": {"pieces": [{"left": 0, "right": 1, "density": 1}]},
        "N": 8, "T": 0.5})");
    CHECK(config.model.name == "table");
    CHECK(config.model.kernel.lambda == 1.0);
    CHECK(config.model.kernel.lip_V == 0.25);
    CHECK(config.model.kernel.eval_V(-1.0) == doctest::Approx(0.75));
}

TEST_CASE("simulate writes the exact fan deterministically") {
    const fs::path out_a = fresh_dir("sim_a");
    const fs::path out_b = fresh_dir("sim_b");
    ExperimentConfig config = parse_config(fan_config(out_a));
    REQUIRE(run_simulate(config) == 0);
    config.output_dir = out_b.string();
    REQUIRE(run_simulate(config) == 0);

    const std::string traj = slurp(out_a / "trajectory.csv");
    CHECK(traj.find("t,i,x\n") == 0);
    CHECK(traj.find("1,0,0\n") != std::string::npos);
    CHECK(traj.find("1,2,0.5\n") != std::string::npos);
    CHECK(traj.find("1,4,1\n") != std::string::npos);
    CHECK(slurp(out_a / "density.csv").find("1,0,0.25,1\n") != std::string::npos);
    CHECK(slurp(out_a / "meta.json").find("\"version\"") != std::string::npos);

    // byte-identical reruns
    CHECK(slurp(out_a / "trajectory.csv") == slurp(out_b / "trajectory.csv"));
    CHECK(slurp(out_a / "density.csv") == slurp(out_b / "density.csv"));
    CHECK(slurp(out_a / "meta.json") == slurp(out_b / "meta.json"));
}

TEST_CASE("simulate can sample the velocity field") {
    const fs::path out = fresh_dir("sim_vel");
    const ExperimentConfig config =
        parse_config(fan_config(out, R"(, "velocity_queries": [0.5])"));
    REQUIRE(run_simulate(config) == 0);
    const std::string csv = slurp(out / "velocity.csv");
    CHECK(csv.find("t,x,G\n") == 0);
    CHECK(csv.find("1,0.5,0.5\n") != std::string::npos);  // G = F on the fan
}

TEST_CASE("verify exit codes and the corruption hook") {
    const fs::path out = fresh_dir("verify_ok");
    ExperimentConfig config = parse_config(fan_config(out));
    CHECK(run_verify(config, {"gap", "smoothing", "support"}) == 0);
    CHECK(fs::exists(out / "bound_reports.json"));

    ExperimentConfig corrupted = parse_config(
        fan_config(fresh_dir("verify_bad"), R"(, "corrupt": {"snapshot": 0, "index": 2})"));
    CHECK(run_verify(corrupted, {"gap"}) == 1);

    CHECK_THROWS_AS(run_verify(config, {"no_such_bound"}), ConfigError);
    CHECK_THROWS_AS(run_verify(config, {"stability"}), ConfigError);  // needs initial_b
}

TEST_CASE("inapplicable bounds report null instead of failing") {
    const fs::path out = fresh_dir("verify_na");
    const ExperimentConfig config = parse_config(R"({
        "model": "ramp",
        "initial": {"pieces": [{"left": 0, "right": 1, "density": 1}]},
        "N": 16, "T": 0.5, "output_dir": ")" + out.string() + "\"}");
    CHECK(run_verify(config, {"max_principle"}) == 0);
    CHECK(slurp(out / "bound_reports.json").find("\"pass\":null") != std::string::npos);
}

TEST_CASE("stability verification with a paired datum") {
    const fs::path out = fresh_dir("verify_pair");
    const ExperimentConfig config = parse_config(R"({
        "model": "exponential",
        "initial": {"pieces": [{"left": 0, "right": 1, "density": 1}]},
        "initial_b": {"pieces": [{"left": 0.05, "right": 1.05, "density": 1}]},
        "N": 32, "T": 1.0, "snapshot_times": [0.5, 1.0],
        "stability_p": [1, 2, "inf"],
        "output_dir": ")" + out.string() + "\"}");
    CHECK(run_verify(config, {"stability"}) == 0);
    const std::string json = slurp(out / "bound_reports.json");
    CHECK(json.find("stability_p=1") != std::string::npos);
    CHECK(json.find("stability_p=inf") != std::string::npos);
}

TEST_CASE("weak residual verification needs bumps and honors the tolerance") {
    const fs::path out = fresh_dir("verify_bump");
    ExperimentConfig config = parse_config(R"({
        "model": "burgers_indicator",
        "initial": {"atoms": [{"x": 0, "mass": 1}]},
        "N": 32, "T": 0.8,
        "snapshot_times": [0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8],
        "bumps": [{"x0": 0.5, "t0": 0.5, "a": 0.3, "s": 0.3}],
        "weak_residual_tol": 0.05,
        "output_dir": ")" + out.string() + "\"}");
    CHECK(run_verify(config, {"weak_residual"}) == 0);

    config.bumps.clear();
    CHECK_THROWS_AS(run_verify(config, {"weak_residual"}), ConfigError);
}

TEST_CASE("oracle comparison guards its scope") {
    const fs::path out = fresh_dir("oracle");
    ExperimentConfig config = parse_config(fan_config(out));
    config.N = 64;
    CHECK(run_oracle_compare(config) == 0);
    const std::string csv = slurp(out / "oracle_gap.csv");
    CHECK(csv.find("t,W1,Winf\n") == 0);
    // the fan is exact: distances are round-off
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    const auto c1 = line.find(','), c2 = line.rfind(',');
    CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) <= 1e-12);
    CHECK(std::stod(line.substr(c2 + 1)) <= 1e-12);

    ExperimentConfig wrong_model = config;
    wrong_model.model = builtin_model("exponential");
    CHECK_THROWS_AS(run_oracle_compare(wrong_model), ConfigError);

    ExperimentConfig wrong_datum = config;
    wrong_datum.initial = Measure1D::uniform(0.0, 1.0);
    CHECK_THROWS_AS(run_oracle_compare(wrong_datum), ConfigError);

    ExperimentConfig early = config;
    early.snapshot_times = {0.0, 1.0};
    CHECK_THROWS_AS(run_oracle_compare(early), ConfigError);
}

TEST_CASE("step rejection surfaces with a suggested step") {
    // two fast/slow clusters separated by more than the ramp kernel's range
    ExperimentConfig config = parse_config(R"({
        "model": "ramp",
        "initial": {"pieces": [{"left": 0, "right": 0.25, "density": 2},
                                 {"left": 5, "right": 5.25, "density": 2}]},
        "N": 4, "T": 25.0, "dt": 25.0})");
    try {
        run_trajectory(config);
        FAIL("expected StepRejected");
    } catch (const StepRejected& e) {
        CHECK(e.dt_used == 25.0);
        CHECK(e.dt_suggested == 12.5);
    }
}

TEST_CASE("converge writes a distance table") {
    const fs::path out = fresh_dir("converge");
    const ExperimentConfig config = parse_config(R"({
        "model": "exponential",
        "initial": {"atoms": [{"x": 0, "mass": 0.5}],
                     "pieces": [{"left": 1, "right": 2, "density": 0.5}]},
        "N": 8, "T": 0.5, "output_dir": ")" + out.string() + "\"}");
    CHECK(run_converge(config, {8, 16}, 1.0) == 0);
    const std::string csv = slurp(out / "convergence.csv");
    CHECK(csv.find("N,distance\n") == 0);
    CHECK(csv.find("8,") != std::string::npos);
    CHECK(csv.find("16,") != std::string::npos);
    CHECK_THROWS_AS(run_converge(config, {16, 8}, 1.0), ConfigError);
    CHECK_THROWS_AS(run_converge(config, {8, 16}, 0.5), ConfigError);
}

TEST_CASE("thread cap honors the environment") {
    setenv("NLCL_THREADS", "3", 1);
    CHECK(thread_cap() == 3);
    unsetenv("NLCL_THREADS");
    CHECK(thread_cap() >= 1);
}

#ifdef NLCL_CLI_PATH
TEST_CASE("command line round trip") {
    const fs::path dir = fresh_dir("cli");
    const fs::path cfg = dir / "config.json";
    {
        std::ofstream out(cfg);
        out << fan_config(dir / "run");
    }
    const std::string cli = NLCL_CLI_PATH;
    CHECK(std::system((cli + " simulate " + cfg.string()).c_str()) == 0);
    CHECK(fs::exists(dir / "run" / "trajectory.csv"));
    CHECK(std::system((cli + " verify " + cfg.string() + " --bounds gap,support").c_str()) == 0);
    CHECK(std::system((cli + " oracle-compare " + cfg.string()).c_str()) == 0);
    CHECK(std::system(
              (cli + " converge " + cfg.string() + " --Ns 4,8 --p 1").c_str()) == 0);

    // missing field -> exit code 2
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << R"({"model":"burgers_indicator","initial":{"atoms":[{"x":0,"mass":1}]},"N":4})";
    }
    const int rc = std::system((cli + " simulate " + bad.string() + " 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 2);
}
#endif
