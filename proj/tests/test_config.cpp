#include "otd/config.hpp"

#include "otd/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace otd;
namespace fs = std::filesystem;

namespace {

std::string tiny_flow_config(const std::string& out_dir) {
    return R"({
      "schema_version": 1,
      "mode": "flow",
      "grid": {"dim": 1, "lo": [-1.5], "hi": [1.5], "n": [21]},
      "source": {"boxes": [
        {"lo": [-1.0], "hi": [0.0], "value": 1.0},
        {"lo": [0.0], "hi": [1.0], "value": -1.0}]},
      "initial": {"type": "constant", "value": 0.5},
      "reg": {"lambda": 1e-2, "delta": 1e-5, "p": 2.0},
      "flow": {"dt0": 0.1, "xi_tol": 1e-5, "t_max": 1e4, "record_every": 5},
      "output_dir": ")" + out_dir + R"(",
      "seed": 7
    })";
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("valid flow config round trips") {
        ExperimentConfig c = parse_config(tiny_flow_config("out"));
        CHECK(c.schema_version == 1);
        CHECK(c.mode == Mode::flow);
        CHECK(c.grid.dim == 1);
        CHECK(c.grid.n[0] == 21);
        CHECK(c.source_boxes.size() == 2);
        CHECK(c.reg.lambda == 1e-2);
        CHECK(c.flow.xi_tol == 1e-5);
        CHECK(c.flow.record_every == 5);
        CHECK(c.seed == 7);
        CHECK(c.output_dir == "out");
    }
    SUBCASE("mode names round trip") {
        for (Mode m : {Mode::flow, Mode::jko, Mode::sweep, Mode::oracle_check})
            CHECK(parse_mode(mode_name(m)) == m);
        CHECK_THROWS_AS(parse_mode("nope"), ConfigError);
    }
    SUBCASE("garbage and structural errors are ConfigError") {
        CHECK_THROWS_AS(parse_config(""), ConfigError);
        CHECK_THROWS_AS(parse_config("not json at all"), ConfigError);
        CHECK_THROWS_AS(parse_config("[1,2,3]"), ConfigError);
        CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), ConfigError);
    }
    SUBCASE("mode-required sections are enforced") {
        // flow mode without a flow section
        CHECK_THROWS_AS(parse_config(R"({
            "schema_version": 1, "mode": "flow",
            "grid": {"dim": 1, "lo": [-1], "hi": [1], "n": [11]},
            "source": {"boxes": []},
            "reg": {"lambda": 1e-2, "delta": 0.0, "p": 2.0}})"),
                        ConfigError);
        // jko mode without a jko section
        CHECK_THROWS_AS(parse_config(R"({
            "schema_version": 1, "mode": "jko",
            "grid": {"dim": 1, "lo": [-1], "hi": [1], "n": [11]},
            "source": {"boxes": []},
            "reg": {"lambda": 1e-2, "delta": 0.0, "p": 2.0}})"),
                        ConfigError);
    }
    SUBCASE("sweep schedules must be strictly decreasing and positive") {
        auto sweep_cfg = [](const std::string& lists) {
            return R"({
              "schema_version": 1, "mode": "sweep",
              "grid": {"dim": 1, "lo": [-1.5], "hi": [1.5], "n": [21]},
              "source": {"boxes": []},
              "reg": {"lambda": 1e-2, "delta": 1e-5, "p": 2.0},
              "flow": {},
              "sweep": )" + lists + "}";
        };
        CHECK_NOTHROW(parse_config(
            sweep_cfg(R"({"lambdas": [0.1, 0.01], "deltas": [1e-3, 1e-5]})")));
        CHECK_THROWS_AS(parse_config(sweep_cfg(
                            R"({"lambdas": [0.01, 0.1], "deltas": [1e-3]})")),
                        ConfigError);
        CHECK_THROWS_AS(parse_config(sweep_cfg(
                            R"({"lambdas": [0.1, 0.0], "deltas": [1e-3]})")),
                        ConfigError);
        CHECK_THROWS_AS(
            parse_config(sweep_cfg(R"({"lambdas": [], "deltas": [1e-3]})")),
            ConfigError);
    }
    SUBCASE("jko tau/n_steps shorthand expands") {
        ExperimentConfig c = parse_config(R"({
            "schema_version": 1, "mode": "jko",
            "grid": {"dim": 1, "lo": [-1.5], "hi": [1.5], "n": [11]},
            "source": {"boxes": []},
            "reg": {"lambda": 1e-2, "delta": 1e-5, "p": 2.0},
            "jko": {"tau": 0.5, "n_steps": 4}})");
        CHECK(c.jko.tau_schedule == std::vector<double>(4, 0.5));
    }
    SUBCASE("load_config on a missing file throws") {
        CHECK_THROWS_AS(load_config("/nonexistent/nope.json"), ConfigError);
    }
}

TEST_CASE("initial density construction") {
    Grid g = build_grid(-1.0, 1.0, 11);
    SUBCASE("zero and constant") {
        CHECK(max_abs(initial_density(g, {"zero", 0.5}, 0).field) == 0.0);
        Density c = initial_density(g, {"constant", 0.25}, 0);
        for (int id = 0; id < g.n_total(); ++id)
            CHECK(c.field[id] == (g.is_boundary(id) ? 0.0 : 0.25));
    }
    SUBCASE("random is seeded and bounded") {
        Density a = initial_density(g, {"random", 1.0}, 99);
        Density b = initial_density(g, {"random", 1.0}, 99);
        Density c = initial_density(g, {"random", 1.0}, 100);
        bool differ = false;
        for (int id = 0; id < g.n_total(); ++id) {
            CHECK(a.field[id] == b.field[id]);
            CHECK(a.field[id] >= 0.0);
            CHECK(a.field[id] <= 1.0);
            if (a.field[id] != c.field[id]) differ = true;
        }
        CHECK(differ);
    }
}

TEST_CASE("run_experiment: flow mode artifacts and reproducibility") {
    TempDir t1("otd_cfg_flow_a");
    TempDir t2("otd_cfg_flow_b");
    ExperimentConfig c = parse_config(tiny_flow_config(t1.path.string()));
    REQUIRE(run_experiment(c) == kExitOk);
    CHECK(fs::exists(t1.path / "trajectory.csv"));
    CHECK(fs::exists(t1.path / "final_field.csv"));
    CHECK(fs::exists(t1.path / "residuals.csv"));

    ExperimentConfig c2 = parse_config(tiny_flow_config(t2.path.string()));
    REQUIRE(run_experiment(c2) == kExitOk);
    CHECK(slurp(t1.path / "trajectory.csv") ==
          slurp(t2.path / "trajectory.csv"));
    CHECK(slurp(t1.path / "final_field.csv") ==
          slurp(t2.path / "final_field.csv"));
}

TEST_CASE("run_experiment: bad inputs exit with the config code") {
    ExperimentConfig c = parse_config(tiny_flow_config("unused"));
    c.grid.n[0] = 1;  // invalid grid caught at run time
    CHECK(run_experiment(c) == kExitConfig);

    ExperimentConfig c2 = parse_config(tiny_flow_config("unused"));
    c2.source_boxes.pop_back();  // unbalanced source
    CHECK(run_experiment(c2) == kExitConfig);
}

TEST_CASE("run_experiment: oracle-check mode on a tiny grid") {
    TempDir t("otd_cfg_oracle");
    ExperimentConfig c = parse_config(R"({
      "schema_version": 1,
      "mode": "oracle-check",
      "grid": {"dim": 1, "lo": [-1.5], "hi": [1.5], "n": [11]},
      "source": {"boxes": [
        {"lo": [-1.0], "hi": [0.0], "value": 1.0},
        {"lo": [0.0], "hi": [1.0], "value": -1.0}]},
      "initial": {"type": "constant", "value": 0.5},
      "reg": {"lambda": 1e-2, "delta": 1e-4, "p": 2.0},
      "flow": {"xi_tol": 1e-8, "t_max": 1e4},
      "jko": {"tau": 0.5, "n_steps": 30},
      "dw": {"K": 16},
      "output_dir": ")" + t.path.string() + R"("
    })");
    REQUIRE(run_experiment(c) == kExitOk);
    const std::string report = slurp(t.path / "oracle_check.csv");
    CHECK(report.rfind("pair,linf\n", 0) == 0);
    CHECK(report.find("flow_vs_bruteforce") != std::string::npos);
    CHECK(report.find("bruteforce_reproducible,1") != std::string::npos);
}
