#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <sys/stat.h>

#include "json.hpp"

#include "hytsl/driver.hpp"

using namespace hytsl;

namespace {

std::string samples(const std::string& name) { return std::string(HYTSL_SAMPLES_DIR) + "/" + name; }

RunConfig base_config(const std::string& system, const std::string& formula) {
    RunConfig cfg;
    cfg.system_path = samples(system);
    cfg.formula = formula;
    return cfg;
}

}  // namespace

TEST_CASE("run: GNI refutation, exit code 1") {
    RunConfig cfg = base_config("gni.pa", samples("gni.htsl"));
    cfg.cycle_iters = 0;
    RunResult r = run(cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.verdict.outcome == Outcome::Violated);
    CHECK(r.report.find("verdict: violated") != std::string::npos);
    CHECK(r.report.find("assert(i < 0)") != std::string::npos);
}

TEST_CASE("run: cycle example with cycle removal, exit code 1") {
    RunConfig cfg = base_config("cycle.pa", samples("cycle.htsl"));
    cfg.k = 1;
    cfg.cycle_iters = 1;
    RunResult r = run(cfg);
    CHECK(r.exit_code == 1);
    CHECK(r.report.find("n := *") != std::string::npos);
}

TEST_CASE("run: inline existential formula with no witness, exit code 0") {
    RunConfig cfg = base_config("gni.pa", "exists pi. G false");
    RunResult r = run(cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.verdict.outcome == Outcome::NoViolationFound);
}

TEST_CASE("run: dispatching and exit codes across prefix shapes") {
    CHECK(run(base_config("gni.pa", "G (c = 0 || c = 1)")).exit_code == 0);          // satisfied
    CHECK(run(base_config("gni.pa", "G (c = 0)")).exit_code == 1);                   // violated
    CHECK(run(base_config("gni.pa", "exists pi. G (c[pi] = 0)")).exit_code == 2);    // witness
    CHECK(run(base_config("gni.pa", "forall pi. G (c[pi] = c[pi])")).exit_code == 0);
    RunConfig ef = base_config("gni.pa", "exists pi. forall pi2. !G (i[pi2] = 0 && c[pi] = c[pi2])");
    ef.cycle_iters = 0;
    CHECK(run(ef).exit_code == 2);
    CHECK_THROWS_AS(run(base_config("gni.pa", "forall pi. exists pi2. forall pi3. G (c[pi] = c[pi2])")),
                    ValidationError);
}

TEST_CASE("run: validation of options and inputs") {
    RunConfig cfg = base_config("gni.pa", "G (c = 0)");
    cfg.k = 0;
    CHECK_THROWS_AS(run(cfg), ValidationError);
    cfg = base_config("gni.pa", "G (undeclared = 0)");
    CHECK_THROWS_AS(run(cfg), ValidationError);
    cfg = base_config("gni.pa", "G (c = 0)");
    cfg.format = "yaml";
    CHECK_THROWS_AS(run(cfg), ValidationError);
    cfg = base_config("missing.pa", "G (c = 0)");
    CHECK_THROWS_AS(run(cfg), ValidationError);
}

TEST_CASE("reports are deterministic byte for byte") {
    RunConfig cfg = base_config("gni.pa", samples("gni.htsl"));
    cfg.cycle_iters = 0;
    RunResult a = run(cfg);
    RunResult b = run(cfg);
    CHECK(a.report == b.report);
    cfg.format = "structured";
    RunResult c = run(cfg);
    RunResult d = run(cfg);
    CHECK(c.report == d.report);
}

TEST_CASE("structured report carries the published fields") {
    RunConfig cfg = base_config("gni.pa", samples("gni.htsl"));
    cfg.cycle_iters = 0;
    cfg.format = "structured";
    RunResult r = run(cfg);
    auto j = nlohmann::json::parse(r.report);
    CHECK(j["schema"] == "hytsl-report-v1");
    CHECK(j["verdict"] == "violated");
    CHECK(j["exit_code"] == 1);
    REQUIRE(j.contains("parameters"));
    CHECK(j["parameters"]["k"] == 1);
    REQUIRE(j["traces"].is_array());
    REQUIRE(j["traces"].size() == 1);
    CHECK(j["traces"][0]["trace"] == "pi");
    CHECK(j["traces"][0]["stem"].is_array());
    CHECK(j["traces"][0]["loop"].is_array());
    CHECK(j.contains("audit"));
    // the witness computation is periodic here, so values are reported
    CHECK(j["traces"][0]["computation"].is_object());
}

TEST_CASE("dot dump of pipeline stages") {
    RunConfig cfg = base_config("gni.pa", samples("gni.htsl"));
    cfg.cycle_iters = 0;
    cfg.dump_stage = "projected";
    cfg.dump_dir = "/tmp";
    RunResult r = run(cfg);
    REQUIRE(r.dump_files.size() == 1);
    std::ifstream f(r.dump_files[0]);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    std::string dot = ss.str();
    CHECK(dot.find("digraph") != std::string::npos);
    CHECK(dot.find("assert(i[pi] < 0)") != std::string::npos);
    CHECK(dot.find("c[pi] := 1") != std::string::npos);
    std::remove(r.dump_files[0].c_str());

    cfg.dump_stage = "product";
    RunResult r2 = run(cfg);
    REQUIRE(r2.dump_files.size() == 1);
    std::ifstream f2(r2.dump_files[0]);
    std::stringstream ss2;
    ss2 << f2.rdbuf();
    // the combined product carries the input refresh and the label predicate
    CHECK(ss2.str().find("i[pi2] := *") != std::string::npos);
    CHECK(ss2.str().find("assert(i[pi2] = 0 && c[pi] = c[pi2])") != std::string::npos);
    std::remove(r2.dump_files[0].c_str());
}

TEST_CASE("environment variable overrides the solver command") {
    // a stub solver that always reports unsat would make the window pruning
    // remove everything; the env var must take precedence over the flag
    std::string stub = "/tmp/hytsl_cli_stub.sh";
    {
        std::ofstream f(stub);
        f << "#!/bin/sh\ncat > /dev/null\necho unsat\n";
    }
    chmod(stub.c_str(), 0755);
    RunConfig cfg = base_config("gni.pa", "G (c = 0)");
    cfg.solver_cmd = "builtin";
    setenv("HYTSL_SOLVER_CMD", stub.c_str(), 1);
    RunResult r = run(cfg);
    unsetenv("HYTSL_SOLVER_CMD");
    // with everything pruned as "infeasible", the product empties: satisfied
    CHECK(r.verdict.outcome == Outcome::Satisfied);
    RunResult builtin = run(cfg);
    CHECK(builtin.verdict.outcome == Outcome::Violated);
    std::remove(stub.c_str());
}
