#include "doctest.h"

#include "entroflow/errors.hpp"
#include "entroflow/experiment.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace entroflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct ScratchOut {
    fs::path root;
    explicit ScratchOut(const std::string& tag) : root(fs::temp_directory_path() / ("entroflow_" + tag)) {
        fs::remove_all(root);
        setenv("ENTROFLOW_OUT", root.c_str(), 1);
    }
    ~ScratchOut() {
        unsetenv("ENTROFLOW_OUT");
        fs::remove_all(root);
    }
};

bool mentions(const std::vector<std::string>& list, const std::string& needle) {
    for (const auto& s : list) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("catalog lists the required presets with their statements") {
    const std::string text = list_presets();
    for (const char* name : {"heat_sanity", "ks_critical_21", "bernis_n2", "plaplace_mono"}) {
        CHECK(text.find(name) != std::string::npos);
    }
    for (const auto& p : preset_catalog()) {
        CHECK_FALSE(p.statement.empty());
        const ExperimentConfig c = parse_config(p.json);
        CHECK(c.name == p.name);
        CHECK(c.statement == p.statement);
        CHECK(validate_config(c).empty());
    }
}

TEST_CASE("validation lists every violation") {
    const ExperimentConfig c = parse_config(R"({
        "name": "bad", "kind": "ineq", "colour": "red",
        "model": {"family": "power_law", "m": -1},
        "grid": {"cells": 4, "dim": 5},
        "ineq": {"check": "other", "trials": 0}})");
    const auto v = validate_config(c);
    CHECK(mentions(v, "unknown field colour"));
    CHECK(mentions(v, "model.m"));
    CHECK(mentions(v, "grid.cells"));
    CHECK(mentions(v, "grid.dim"));
    CHECK(mentions(v, "run.seed"));
    CHECK(mentions(v, "ineq.check"));
    CHECK(mentions(v, "ineq.trials"));
}

TEST_CASE("type mismatches are reported, not thrown") {
    const ExperimentConfig c = parse_config(R"({"name": "x", "grid": {"cells": "many"}, "run": {"record_every": 2.5}})");
    const auto v = validate_config(c);
    CHECK(mentions(v, "grid.cells: expected a number"));
    CHECK(mentions(v, "run.record_every: expected an integer"));
}

TEST_CASE("malformed json and unknown sources") {
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(load_config("no_such_preset_or_file"), ConfigError);
    CHECK(run_experiment(std::string("no_such_preset_or_file")) == kExitConfig);
}

TEST_CASE("strict keller-segel with q = 1.5 is a config error citing the hypothesis") {
    ScratchOut out("strict");
    const ExperimentConfig c = parse_config(
        R"({"name": "strict_q", "kind": "ks", "grid": {"cells": 32}, "ks": {"p": 2.5, "q": 1.5, "strict": true}})");
    std::string message;
    CHECK(run_experiment(c, &message) == kExitConfig);
    CHECK(message.find("q in (1/2,1]") != std::string::npos);
}

TEST_CASE("heat_sanity passes and reports a monotone Fisher series") {
    ScratchOut out("heat");
    CHECK(run_experiment(std::string("heat_sanity")) == kExitPass);
    const fs::path dir = out.root / "heat_sanity";
    const std::string meters = slurp(dir / "meters.csv");
    CHECK(meters.rfind("t,entropy,fisher_sigma,fisher_st,dissipation,r_entropy,r_fisher\n", 0) == 0);
    const std::string summary = slurp(dir / "summary.json");
    CHECK(summary.find("\"fisher_series\"") != std::string::npos);
    CHECK(summary.find("\"statement\"") != std::string::npos);
    CHECK(fs::exists(dir / "field_final.csv"));
}

TEST_CASE("same seed gives byte-identical csv") {
    ScratchOut out("determinism");
    ExperimentConfig c = parse_config(R"({"name": "det", "kind": "ineq", "grid": {"cells": 16, "dim": 2},
        "run": {"seed": 99}, "ineq": {"check": "bernis", "trials": 12}})");
    REQUIRE(run_experiment(c) == kExitPass);
    const std::string first = slurp(out.root / "det" / "trials.csv");
    REQUIRE(run_experiment(c) == kExitPass);
    CHECK(slurp(out.root / "det" / "trials.csv") == first);
    c.seed = 100;
    REQUIRE(run_experiment(c) == kExitPass);
    CHECK(slurp(out.root / "det" / "trials.csv") != first);
}

TEST_CASE("numerical aborts map to exit code 3 and still write a summary") {
    ScratchOut out("abort");
    const ExperimentConfig c = parse_config(R"({"name": "blowup", "kind": "ks", "grid": {"cells": 32},
        "run": {"t_end": 0.05}, "ks": {"p": 0, "q": 0, "mass": 50, "ceiling": 60}})");
    std::string message;
    CHECK(run_experiment(c, &message) == kExitNumericalAbort);
    CHECK(fs::exists(out.root / "blowup" / "ks_summary.json"));
    CHECK(fs::exists(out.root / "blowup" / "ks_monitors.csv"));
}

TEST_CASE("p-laplace experiment writes its monitor table") {
    ScratchOut out("pl");
    const ExperimentConfig c = parse_config(R"({"name": "pl", "kind": "plaplace", "grid": {"cells": 32},
        "run": {"t_end": 0.01, "record_every": 16}, "plaplace": {"p": 2.5, "delta": 1e-6}})");
    CHECK(run_experiment(c) == kExitPass);
    CHECK(slurp(out.root / "pl" / "pl_monitors.csv").rfind("t,I,dI_dt,residual_prop61\n", 0) == 0);
}

TEST_CASE("output root precedence") {
    ExperimentConfig c;
    c.name = "n";
    c.output = "from_config";
    unsetenv("ENTROFLOW_OUT");
    CHECK(output_directory(c) == fs::path("from_config") / "n");
    setenv("ENTROFLOW_OUT", "/tmp/env_root", 1);
    CHECK(output_directory(c) == fs::path("/tmp/env_root") / "n");
    unsetenv("ENTROFLOW_OUT");
    c.output.clear();
    CHECK(output_directory(c) == fs::path("out") / "n");
}
