#pragma once

#include <cstdlib>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "hytsl/checker.hpp"

namespace hytsl {

// ---------------------------------------------------------------------------
// End-to-end run configuration. Reports are deterministic: identical inputs
// and options produce byte-identical output, so nothing time- or host-
// dependent may appear in them.

struct RunConfig {
    std::string system_path;
    std::string formula;  // path to a formula file, or inline formula text
    int k = 1;
    int cycle_iters = 1;
    int stem_bound = 8;
    std::string solver_cmd;           // empty: built-in solver
    long long value_bound = 32;       // built-in solver search box
    long long complement_budget = 1000000;
    int timeout_ms = 5000;            // per external-solver query
    std::string dump_stage;           // one of the pipeline stage names, or empty
    std::string dump_dir = ".";
    std::string format = "text";      // "text" or "structured"
    bool partner_audit = true;
};

struct RunResult {
    Verdict verdict;
    int exit_code = 3;
    std::string report;
    std::vector<std::string> dump_files;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f.good()) throw ValidationError("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline bool file_exists(const std::string& path) {
    std::ifstream f(path);
    return f.good();
}

inline std::string print_statement_list(const std::vector<Statement>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += "; ";
        s += v[i].to_string();
    }
    return s;
}

inline nlohmann::json computation_json(const Computation& z) {
    auto asg = [](const Assignment& a) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [id, v] : a.entries()) j[id.to_string()] = v.to_string();
        return j;
    };
    nlohmann::json j;
    j["initial"] = asg(z.initial);
    j["stem"] = nlohmann::json::array();
    for (const auto& a : z.stem) j["stem"].push_back(asg(a));
    j["loop"] = nlohmann::json::array();
    for (const auto& a : z.loop) j["loop"].push_back(asg(a));
    return j;
}

inline int exit_code_of(Outcome o) {
    switch (o) {
        case Outcome::Satisfied:
        case Outcome::NoViolationFound:
            return 0;
        case Outcome::Violated:
            return 1;
        case Outcome::WitnessFound:
            return 2;
        case Outcome::ResourceExceeded:
            return 3;
    }
    return 3;
}

inline std::string render_text(const RunConfig& cfg, const Formula& phi, const Verdict& v) {
    std::ostringstream os;
    os << "system:  " << cfg.system_path << "\n";
    os << "formula: " << phi.to_string() << "\n";
    os << "options: k=" << cfg.k << " k'=" << cfg.cycle_iters << " stem-bound=" << cfg.stem_bound
       << " solver=" << (cfg.solver_cmd.empty() ? std::string("builtin(+-") + std::to_string(cfg.value_bound) + ")"
                                                : cfg.solver_cmd)
       << "\n";
    os << "verdict: " << outcome_name(v.outcome) << "\n";
    os << "detail:  " << v.detail << "\n";
    for (const auto& tl : v.traces) {
        os << (v.outcome == Outcome::WitnessFound ? "witness" : "counterexample");
        if (!tl.trace.empty()) os << " [" << tl.trace << "]";
        os << ": " << print_statement_list(tl.stem) << (tl.stem.empty() ? "(" : " (")
           << print_statement_list(tl.loop) << ")^w\n";
        if (tl.computation) {
            os << "  values: initial " << tl.computation->initial.to_string() << "\n";
            for (size_t i = 0; i < tl.computation->stem.size(); ++i)
                os << "          t" << i << " " << tl.computation->stem[i].to_string() << "\n";
            for (size_t i = 0; i < tl.computation->loop.size(); ++i)
                os << "          loop+" << i << " " << tl.computation->loop[i].to_string() << "\n";
        }
    }
    for (const auto& line : v.audit) os << "audit:   " << line << "\n";
    return os.str();
}

inline std::string render_structured(const RunConfig& cfg, const Formula& phi, const Verdict& v) {
    nlohmann::json j;
    j["schema"] = "hytsl-report-v1";
    j["system"] = cfg.system_path;
    j["formula"] = phi.to_string();
    j["parameters"] = {{"k", cfg.k},
                       {"cycle_iters", cfg.cycle_iters},
                       {"stem_bound", cfg.stem_bound},
                       {"value_bound", cfg.value_bound},
                       {"complement_budget", cfg.complement_budget},
                       {"solver", cfg.solver_cmd.empty() ? "builtin" : cfg.solver_cmd}};
    j["verdict"] = outcome_name(v.outcome);
    j["detail"] = v.detail;
    j["exit_code"] = exit_code_of(v.outcome);
    nlohmann::json traces = nlohmann::json::array();
    for (const auto& tl : v.traces) {
        nlohmann::json t;
        t["trace"] = tl.trace;
        t["stem"] = nlohmann::json::array();
        for (const auto& s : tl.stem) t["stem"].push_back(s.to_string());
        t["loop"] = nlohmann::json::array();
        for (const auto& s : tl.loop) t["loop"].push_back(s.to_string());
        if (tl.computation)
            t["computation"] = computation_json(*tl.computation);
        else
            t["computation"] = nullptr;
        traces.push_back(t);
    }
    j["traces"] = traces;
    j["audit"] = v.audit;
    return j.dump(2) + "\n";
}

}  // namespace detail

inline IdentResolver resolver_for_system(const ProgramAutomaton& p) {
    std::set<std::string> inputs;
    for (const auto& i : p.inputs) inputs.insert(i.name);
    return [inputs](const std::string& name, const std::string& trace) {
        return Ident{name, inputs.count(name) ? VarKind::Input : VarKind::Cell, trace};
    };
}

inline std::unique_ptr<Solver> make_solver(const RunConfig& cfg) {
    std::string cmd = cfg.solver_cmd;
    if (const char* env = std::getenv("HYTSL_SOLVER_CMD")) {
        if (*env) cmd = env;  // environment overrides the flag
    }
    if (cmd.empty() || cmd == "builtin") return std::make_unique<InternalSolver>(cfg.value_bound);
    return std::make_unique<Smt2Solver>(cmd, cfg.timeout_ms);
}

inline RunResult run(const RunConfig& cfg) {
    if (cfg.k < 1) throw ValidationError("k must be at least 1");
    if (cfg.cycle_iters < 0) throw ValidationError("cycle iterations must be nonnegative");
    if (cfg.stem_bound < 1 || cfg.value_bound < 1 || cfg.complement_budget < 1)
        throw ValidationError("bounds must be positive");
    if (cfg.format != "text" && cfg.format != "structured")
        throw ValidationError("format must be text or structured");

    ProgramAutomaton system = parse_program_automaton(detail::read_file(cfg.system_path));
    std::string formula_text =
        detail::file_exists(cfg.formula) ? detail::read_file(cfg.formula) : cfg.formula;
    Formula phi = parse_formula(formula_text, resolver_for_system(system));

    // formula identifiers must be declared by the system
    std::set<Ident> declared;
    for (const auto& id : system.universe()) declared.insert(id.without_trace());
    phi.core.for_each_atom([&](const TemporalFormula& a) {
        auto check = [&](const Ident& id) {
            if (!declared.count(id.without_trace()))
                throw ValidationError("formula uses undeclared identifier " + id.name);
        };
        if (a.kind() == TemporalFormula::Kind::Pred)
            a.term().for_each_var(check);
        else {
            check(a.update().target);
            a.update().source.for_each_var(check);
        }
    });

    RunResult result;
    std::unique_ptr<Solver> solver = make_solver(cfg);
    CheckOptions opts;
    opts.k = cfg.k;
    opts.k_prime = cfg.cycle_iters;
    opts.lasso.stem_bound = cfg.stem_bound;
    opts.lasso.loop_bound = cfg.stem_bound;
    opts.complement_budget = cfg.complement_budget;
    opts.partner_audit = cfg.partner_audit;
    if (!cfg.dump_stage.empty()) {
        opts.dump = [&result, &cfg](const std::string& stage, const ProgramAutomaton& pa) {
            if (stage != cfg.dump_stage) return;
            std::string path = cfg.dump_dir + "/" + stage + ".dot";
            std::ofstream f(path);
            if (!f.good()) throw ValidationError("cannot write " + path);
            f << to_dot<Statement>(pa.aut, stage, [](const Statement& s) { return s.to_string(); });
            result.dump_files.push_back(path);
        };
    }

    // dispatch on the quantifier prefix shape
    size_t lead = 0;
    while (lead < phi.prefix.size() && phi.prefix[lead].quant == phi.prefix[0].quant) ++lead;
    for (size_t i = lead; i < phi.prefix.size(); ++i)
        if (phi.prefix[i].quant == phi.prefix[0].quant)
            throw ValidationError("quantifier prefix exceeds one alternation");
    Verdict v;
    if (phi.prefix.empty()) {
        v = check_tsl(system, phi, *solver, opts);
    } else if (lead == phi.prefix.size()) {
        v = phi.prefix[0].quant == Quantifier::Forall ? check_universal(system, phi, *solver, opts)
                                                      : check_existential(system, phi, *solver, opts);
    } else if (phi.prefix[0].quant == Quantifier::Forall) {
        v = refute_forall_exists(system, phi, *solver, opts);
    } else {
        v = prove_exists_forall(system, phi, *solver, opts);
    }

    result.verdict = v;
    result.exit_code = detail::exit_code_of(v.outcome);
    result.report = cfg.format == "text" ? detail::render_text(cfg, phi, v)
                                         : detail::render_structured(cfg, phi, v);
    return result;
}

}  // namespace hytsl
