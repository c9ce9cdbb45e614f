#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "hytsl/driver.hpp"

int main(int argc, char** argv) {
    CLI::App app{"TSL(T) / HyperTSL(T) model checker over symbolic program automata"};

    hytsl::RunConfig cfg;
    app.add_option("--system", cfg.system_path, "program automaton file")->required();
    app.add_option("--formula", cfg.formula, "formula file or inline formula text")->required();
    app.add_option("--k", cfg.k, "infeasibility window size (k >= 1)")->capture_default_str();
    app.add_option("--cycle-iters", cfg.cycle_iters, "iterations of infeasible-cycle removal (k')")
        ->capture_default_str();
    app.add_option("--stem-bound", cfg.stem_bound, "lasso search bound for stems and loops")
        ->capture_default_str();
    app.add_option("--solver-cmd", cfg.solver_cmd,
                   "SMT-LIB v2 solver command reading a query on stdin (empty: built-in solver); "
                   "the HYTSL_SOLVER_CMD environment variable overrides this flag");
    app.add_option("--value-bound", cfg.value_bound, "search box +-B of the built-in solver")
        ->capture_default_str();
    app.add_option("--complement-budget", cfg.complement_budget, "complementation state budget")
        ->capture_default_str();
    app.add_option("--timeout", cfg.timeout_ms, "per-query solver timeout in milliseconds")
        ->capture_default_str();
    app.add_option("--dump", cfg.dump_stage,
                   "write <stage>.dot for one pipeline stage: raw, self-composed, product, "
                   "k-pruned, cycle-pruned, projected, difference");
    app.add_option("--dump-dir", cfg.dump_dir, "directory for --dump output")->capture_default_str();
    app.add_option("--format", cfg.format, "report format: text or structured")->capture_default_str();
    app.add_flag("--no-partner-audit", [&cfg](size_t) { cfg.partner_audit = false; },
                 "skip the secondary existential-partner confirmation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        hytsl::RunResult r = hytsl::run(cfg);
        std::cout << r.report;
        return r.exit_code;
    } catch (const hytsl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
