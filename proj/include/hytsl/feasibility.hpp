#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hytsl/program.hpp"
#include "hytsl/solver.hpp"

namespace hytsl {

// ---------------------------------------------------------------------------
// Constraint encoding of Def.-5 matching over indexed variables x@t.
// Level 0 is the pre-state; step i relates level i-1 to level i. Cells obey
// frame conditions, inputs never do. With free_init the pre-state is fully
// symbolic, otherwise the automaton's pinned cells are fixed at level 0.

struct WindowEncoding {
    VarTable vars;
    LinFormula formula = LinFormula::truth(true);
    std::vector<std::map<Ident, VarId>> levels;

    VarId at(const Ident& id, size_t level) const {
        const auto& m = levels.at(level);
        auto it = m.find(id);
        if (it == m.end()) throw UnboundVariable("no encoded variable for " + id.to_string());
        return it->second;
    }
};

inline WindowEncoding encode_window(const ProgramAutomaton& ctx, const std::vector<Statement>& basics,
                                    bool free_init) {
    WindowEncoding enc;
    std::vector<Ident> universe = ctx.universe();
    size_t L = basics.size();
    enc.levels.resize(L + 1);
    for (size_t level = 0; level <= L; ++level)
        for (const auto& id : universe)
            enc.levels[level][id] = enc.vars.fresh(id.to_string() + "@" + std::to_string(level));

    std::vector<LinFormula> conj;
    if (!free_init) {
        for (const auto& [id, v] : ctx.initial.entries())
            conj.push_back(LinFormula::eq(LinExpr::of_var(enc.at(id, 0)), LinExpr::of_const(v.as_int())));
    }
    for (size_t i = 1; i <= L; ++i) {
        const Statement& s = basics[i - 1];
        if (!s.is_basic()) throw Error("encode_window needs basic statements");
        auto prev = [&](const Ident& id) { return enc.at(id, i - 1); };
        auto frame = [&](const std::optional<Ident>& written) {
            for (const auto& c : ctx.cells) {
                if (written && c == *written) continue;
                conj.push_back(LinFormula::eq(LinExpr::of_var(enc.at(c, i)), LinExpr::of_var(enc.at(c, i - 1))));
            }
        };
        switch (s.kind()) {
            case Statement::Kind::Assert:
                conj.push_back(linearize_bool(s.pred(), prev));
                frame(std::nullopt);
                break;
            case Statement::Kind::Assign:
                conj.push_back(LinFormula::eq(LinExpr::of_var(enc.at(s.cell(), i)), linearize_int(s.source(), prev)));
                frame(s.cell());
                break;
            case Statement::Kind::Havoc:
                frame(s.cell());
                break;
            case Statement::Kind::Seq:
                throw Error("unreachable");
        }
    }
    enc.formula = LinFormula::conj(std::move(conj));
    return enc;
}

// SAT result of the window constraints with a free pre-state. Solver failures
// land on the conservative side: the window counts as feasible, so no
// transition is ever pruned on a failed query.
inline bool k_window_feasible(const ProgramAutomaton& ctx, const std::vector<Statement>& window,
                              Solver& solver) {
    std::vector<Statement> basics = flatten(window);
    WindowEncoding enc = encode_window(ctx, basics, /*free_init=*/true);
    try {
        SolverAnswer ans = solver.check(enc.vars, enc.formula);
        if (ans.status == SatResult::Unsat) return false;
        return true;  // Sat or Unknown
    } catch (const SolverError&) {
        return true;
    }
}

// ---------------------------------------------------------------------------
// P without k-infeasibility: states are paths of up to k-1 transitions (plus
// the shorter prefixes growing from the initial state); a transition extends
// a path only when the extended statement window is feasible.

inline ProgramAutomaton remove_k_infeasibility(const ProgramAutomaton& p, int k, Solver& solver) {
    if (k < 1) throw Error("k must be at least 1");
    ProgramAutomaton out;
    out.cells = p.cells;
    out.inputs = p.inputs;
    out.initial = p.initial;
    out.trace_names = p.trace_names;
    out.system_mode = p.system_mode;

    struct PathState {
        std::vector<int> states;       // k' + 1 automaton states
        std::vector<int> transitions;  // k' transition indices
    };
    std::map<std::vector<int>, int> ids;  // keyed by (state0, tr...) sequence
    std::vector<PathState> order;
    auto key_of = [](const PathState& ps) {
        std::vector<int> key{ps.states[0]};
        key.insert(key.end(), ps.transitions.begin(), ps.transitions.end());
        return key;
    };
    auto name_of = [&](const PathState& ps) {
        std::string n;
        for (size_t i = 0; i < ps.states.size(); ++i) {
            if (i) n += ".";
            const std::string& sn = p.aut.name(ps.states[i]);
            n += sn.empty() ? "q" + std::to_string(ps.states[i]) : sn;
        }
        return n;
    };
    auto intern = [&](const PathState& ps) {
        auto key = key_of(ps);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        int id = out.aut.add_state(p.aut.is_accepting(ps.states.back()), name_of(ps));
        ids.emplace(std::move(key), id);
        order.push_back(ps);
        return id;
    };

    std::map<std::string, bool> window_cache;
    auto window_ok = [&](const std::vector<Statement>& window) {
        std::string key;
        for (const auto& s : window) key += s.to_string() + "\n";
        auto it = window_cache.find(key);
        if (it != window_cache.end()) return it->second;
        bool ok = k_window_feasible(p, window, solver);
        window_cache.emplace(std::move(key), ok);
        return ok;
    };

    PathState init;
    init.states = {p.aut.initial()};
    intern(init);
    out.aut.set_initial(0);

    std::map<Transition<Statement>, TransitionProvenance> prov;
    for (size_t i = 0; i < order.size(); ++i) {
        PathState ps = order[i];
        int from = ids[key_of(ps)];
        for (int ti : p.aut.out(ps.states.back())) {
            const auto& t = p.aut.transitions()[static_cast<size_t>(ti)];
            std::vector<Statement> window;
            for (int prev_ti : ps.transitions)
                window.push_back(p.aut.transitions()[static_cast<size_t>(prev_ti)].label);
            window.push_back(t.label);
            if (static_cast<int>(window.size()) > k) window.erase(window.begin());
            if (!window_ok(window)) continue;
            PathState next = ps;
            next.states.push_back(t.to);
            next.transitions.push_back(ti);
            if (static_cast<int>(next.transitions.size()) > k - 1) {
                next.states.erase(next.states.begin());
                next.transitions.erase(next.transitions.begin());
            }
            int to = intern(next);
            Transition<Statement> nt{from, t.label, to};
            out.aut.add_transition(nt.from, nt.label, nt.to);
            TransitionProvenance pr =
                p.has_provenance() ? p.provenance[static_cast<size_t>(ti)] : TransitionProvenance{{t.label}, std::nullopt};
            prov.emplace(nt, std::move(pr));
        }
    }
    out.provenance.clear();
    for (const auto& t : out.aut.transitions()) out.provenance.push_back(prov.at(t));
    return out;
}

// ---------------------------------------------------------------------------
// Ranking functions: affine maps over cells, verified to decrease by at
// least one per loop iteration while staying nonnegative whenever the
// iteration's constraints hold.

struct RankingFunction {
    std::map<Ident, BigInt> coeffs;
    BigInt constant;

    std::string to_string() const {
        std::string s;
        for (const auto& [id, c] : coeffs) {
            if (c.is_zero()) continue;
            if (!s.empty()) s += " + ";
            s += (c.is_one() ? "" : c.to_string() + "*") + id.to_string();
        }
        if (s.empty()) return constant.to_string();
        if (!constant.is_zero()) s += " + " + constant.to_string();
        return s;
    }
};

struct LassoWitness {
    Lasso<Statement> lasso;
    std::vector<Statement> basic_steps;     // flattened statements of the witness
    std::vector<Assignment> steps;          // steps[0] is the pre-state
    bool periodic = false;                  // loop assignments repeat verbatim
    size_t loop_start = 0;                  // index into basic_steps where the loop begins
};

struct FeasibilityVerdict {
    enum class Status { ProvedFeasible, ProvedInfeasible, Unknown };
    Status status = Status::Unknown;
    std::string reason;
    std::optional<LassoWitness> witness;
    std::optional<RankingFunction> ranking;
    int bound = 0;
};

namespace detail {

// coefficient vectors over [-bound, bound], simplest first
inline const std::vector<std::vector<long long>>& coeff_vectors(int len, int bound) {
    static std::map<std::pair<int, int>, std::vector<std::vector<long long>>> cache;
    auto key = std::make_pair(len, bound);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::vector<long long>> all;
    std::vector<long long> cur(static_cast<size_t>(len), 0);
    std::function<void(int)> gen = [&](int i) {
        if (i == len) {
            all.push_back(cur);
            return;
        }
        for (long long v = -bound; v <= bound; ++v) {
            cur[static_cast<size_t>(i)] = v;
            gen(i + 1);
        }
    };
    gen(0);
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
        long long mx = 0, my = 0;
        for (long long v : x) mx += v < 0 ? -v : v;
        for (long long v : y) my += v < 0 ? -v : v;
        if (mx != my) return mx < my;
        return x < y;
    });
    return cache.emplace(key, std::move(all)).first->second;
}

}  // namespace detail

// Feasibility of an infinite repetition of one cycle. First an SMT check of
// a single unrolled iteration; if that is satisfiable, a ranking-function
// search over the affine template. Solver failures degrade to unknown.
inline FeasibilityVerdict cycle_infeasible(const std::vector<Statement>& cycle, const ProgramAutomaton& ctx,
                                           Solver& solver, int coeff_bound = 3) {
    FeasibilityVerdict v;
    std::vector<Statement> basics = flatten(cycle);
    // an assert-free cycle can never block
    bool has_assert = false;
    for (const auto& b : basics)
        if (b.kind() == Statement::Kind::Assert) has_assert = true;
    if (!has_assert) {
        v.status = FeasibilityVerdict::Status::ProvedFeasible;
        v.reason = "assert-free cycle, always repeatable";
        return v;
    }
    WindowEncoding enc = encode_window(ctx, basics, /*free_init=*/true);
    std::map<VarId, BigInt> first_model;
    try {
        SolverAnswer ans = solver.check(enc.vars, enc.formula);
        if (ans.status == SatResult::Unsat) {
            v.status = FeasibilityVerdict::Status::ProvedInfeasible;
            v.reason = "one unrolled iteration is unsatisfiable";
            return v;
        }
        if (ans.status == SatResult::Sat && ans.model) first_model = *ans.model;
        // a stationary iteration repeats forever, so no ranking can exist
        std::vector<LinFormula> fix{enc.formula};
        for (const auto& id : ctx.universe())
            fix.push_back(LinFormula::eq(LinExpr::of_var(enc.at(id, 0)),
                                         LinExpr::of_var(enc.at(id, basics.size()))));
        SolverAnswer st = solver.check(enc.vars, LinFormula::conj(std::move(fix)));
        if (st.status == SatResult::Sat) {
            v.status = FeasibilityVerdict::Status::ProvedFeasible;
            v.reason = "stationary iteration found, cycle repeats forever";
            return v;
        }
    } catch (const SolverError& e) {
        v.status = FeasibilityVerdict::Status::Unknown;
        v.reason = std::string("solver failure: ") + e.what();
        return v;
    }

    // cells occurring in the loop are the ranking template's support
    std::set<Ident> occurring_set;
    for (const auto& s : basics)
        s.for_each_var([&](const Ident& id) {
            for (const auto& c : ctx.cells)
                if (c == id) occurring_set.insert(id);
        });
    std::vector<Ident> occurring(occurring_set.begin(), occurring_set.end());
    size_t L = basics.size();

    auto f_expr = [&](const std::vector<long long>& coeffs, size_t level) {
        LinExpr e;
        for (size_t i = 0; i < occurring.size(); ++i)
            e.add_coeff(enc.at(occurring[i], level), BigInt(coeffs[i]));
        e.constant = BigInt(coeffs.back());
        return e;
    };

    // counterexample samples as saturated int64 vectors (pre values then post
    // values); the cheap filter rejects almost every template candidate, so
    // only promising ones reach the solver
    std::vector<std::vector<long long>> samples;
    auto add_sample = [&](const std::map<VarId, BigInt>& model) {
        if (samples.size() >= 64) return;
        std::vector<long long> row;
        auto clamp = [](const BigInt& b) {
            const long long cap = 1000000000000000LL;
            if (!b.fits_int64()) return b.is_negative() ? -cap : cap;
            long long v = b.to_int64();
            return v > cap ? cap : v < -cap ? -cap : v;
        };
        for (size_t level : {size_t{0}, L})
            for (const auto& id : occurring) {
                auto it = model.find(enc.at(id, level));
                row.push_back(it == model.end() ? 0 : clamp(it->second));
            }
        samples.push_back(std::move(row));
    };
    if (!first_model.empty()) add_sample(first_model);

    const auto& candidates = detail::coeff_vectors(static_cast<int>(occurring.size()) + 1, coeff_bound);
    for (const auto& coeffs : candidates) {
        bool all_zero = true;
        for (size_t i = 0; i < occurring.size(); ++i)
            if (coeffs[i] != 0) all_zero = false;
        if (all_zero) continue;
        // cheap rejection against cached counterexample samples
        bool rejected = false;
        size_t w = occurring.size();
        for (const auto& row : samples) {
            long long pre = coeffs.back(), post = coeffs.back();
            for (size_t i = 0; i < w; ++i) {
                pre += coeffs[i] * row[i];
                post += coeffs[i] * row[w + i];
            }
            if (pre < 0 || post > pre - 1) {
                rejected = true;
                break;
            }
        }
        if (rejected) continue;
        // validity query: iteration constraints && !(f_pre >= 0 && f_post <= f_pre - 1) unsat?
        LinExpr pre = f_expr(coeffs, 0);
        LinExpr post = f_expr(coeffs, L);
        LinFormula cond = LinFormula::conj(LinFormula::ge0(pre),
                                           LinFormula::ge(pre - LinExpr::of_const(BigInt(1)), post));
        LinFormula query = LinFormula::conj(enc.formula, LinFormula::negate(cond));
        try {
            SolverAnswer ans = solver.check(enc.vars, query);
            if (ans.status == SatResult::Unsat) {
                RankingFunction rf;
                for (size_t i = 0; i < occurring.size(); ++i)
                    if (coeffs[i] != 0) rf.coeffs[occurring[i]] = BigInt(coeffs[i]);
                rf.constant = BigInt(coeffs.back());
                v.status = FeasibilityVerdict::Status::ProvedInfeasible;
                v.reason = "verified ranking function " + rf.to_string();
                v.ranking = rf;
                return v;
            }
            if (ans.status == SatResult::Sat && ans.model) add_sample(*ans.model);
        } catch (const SolverError&) {
            // conservatively treat this candidate as unverifiable
        }
    }
    v.status = FeasibilityVerdict::Status::Unknown;
    v.reason = "no affine ranking function within coefficient bound " + std::to_string(coeff_bound);
    v.bound = coeff_bound;
    return v;
}

// ---------------------------------------------------------------------------
// The automaton accepting exactly the traces that end with the given cycle
// repeated forever: a sink-free initial state with a self-loop per alphabet
// letter, an entry edge, and the cycle itself; all non-initial states accept.

inline BuchiAutomaton<Statement> cycle_automaton(const std::vector<Statement>& cycle,
                                                 const std::vector<Statement>& alphabet) {
    if (cycle.empty()) throw Error("cycle must be nonempty");
    int n = static_cast<int>(cycle.size());
    BuchiAutomaton<Statement> a;
    a.add_state(false, "pre");
    for (int i = 1; i <= n; ++i) a.add_state(true, "c" + std::to_string(i));
    a.set_initial(0);
    for (const auto& l : alphabet) a.add_transition(0, l, 0);
    a.add_transition(0, cycle[0], n >= 2 ? 2 : 1);
    for (int j = 1; j < n; ++j) a.add_transition(j, cycle[static_cast<size_t>(j - 1)], j + 1);
    a.add_transition(n, cycle[static_cast<size_t>(n - 1)], 1);
    return a;
}

// Complement of L(A_rho) built directly: a word fails to end with rho^omega
// exactly when, for every phase alignment, the pattern is violated infinitely
// often. States track the position counter modulo |rho| and the phases the
// last letter violated; one generalized acceptance set per phase, counter
// degeneralized. Deterministic and linear in |rho|^2 * 2^|rho|, which keeps
// iterated subtraction from compounding rank-based complement blowups.
inline BuchiAutomaton<Statement> cycle_tail_complement(const std::vector<Statement>& cycle,
                                                       const std::vector<Statement>& alphabet) {
    int n = static_cast<int>(cycle.size());
    if (n > 12) throw BudgetExceeded("cycle too long for the phase-tracking complement", n);
    BuchiAutomaton<Statement> raw;
    std::map<std::pair<int, uint32_t>, int> ids;
    std::vector<std::pair<int, uint32_t>> order;
    auto intern = [&](int c, uint32_t mask) {
        auto key = std::make_pair(c, mask);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        int id = raw.add_state(false);
        ids.emplace(key, id);
        order.push_back(key);
        return id;
    };
    intern(0, 0);
    raw.set_initial(0);
    for (size_t i = 0; i < order.size(); ++i) {
        auto [c, mask] = order[i];
        int from = ids[{c, mask}];
        for (const auto& a : alphabet) {
            uint32_t next_mask = 0;
            for (int phi = 0; phi < n; ++phi)
                if (!(a == cycle[static_cast<size_t>((phi + c) % n)])) next_mask |= 1u << phi;
            int to = intern((c + 1) % n, next_mask);
            raw.add_transition(from, a, to);
        }
    }
    std::vector<std::vector<bool>> sets(static_cast<size_t>(n),
                                        std::vector<bool>(static_cast<size_t>(raw.num_states()), false));
    for (const auto& [key, id] : ids)
        for (int phi = 0; phi < n; ++phi)
            if (key.second & (1u << phi)) sets[static_cast<size_t>(phi)][static_cast<size_t>(id)] = true;
    return degeneralize(raw, sets);
}

// ---------------------------------------------------------------------------
// Iterated removal of provably infeasible accepting cycles:
//   P := P \ (union of A_rho over proved-infeasible rho), k' times.

struct CycleRemovalStats {
    int iterations_run = 0;
    int cycles_examined = 0;
    int cycles_removed = 0;
    std::vector<std::string> removed;  // printed cycles with their proof
};

inline ProgramAutomaton remove_infeasible_cycles(const ProgramAutomaton& p, int k_prime, Solver& solver,
                                                 long long budget = 1000000,
                                                 CycleRemovalStats* stats = nullptr) {
    if (k_prime < 0) throw Error("k' must be nonnegative");
    ProgramAutomaton cur = p;
    for (int iter = 0; iter < k_prime; ++iter) {
        std::vector<int> state_map, tr_origin;
        BuchiAutomaton<Statement> reach = restrict_to_reachable(cur.aut, &state_map, &tr_origin);
        auto cycles = enumerate_simple_cycles(reach, budget);
        // dedup by the lexicographically least rotation of the label sequence
        std::set<std::vector<std::string>> seen;
        std::vector<std::vector<Statement>> infeasible;
        for (const auto& cyc : cycles) {
            bool accepting = false;
            for (const auto& t : cyc)
                if (reach.is_accepting(t.from) || reach.is_accepting(t.to)) accepting = true;
            if (!accepting) continue;
            std::vector<Statement> labels;
            for (const auto& t : cyc) labels.push_back(t.label);
            std::vector<std::string> printed;
            for (const auto& s : labels) printed.push_back(s.to_string());
            std::vector<std::string> best = printed;
            for (size_t r = 1; r < printed.size(); ++r) {
                std::vector<std::string> rot(printed.begin() + static_cast<long>(r), printed.end());
                rot.insert(rot.end(), printed.begin(), printed.begin() + static_cast<long>(r));
                if (rot < best) best = rot;
            }
            if (!seen.insert(best).second) continue;
            if (stats) ++stats->cycles_examined;
            FeasibilityVerdict fv = cycle_infeasible(labels, cur, solver);
            if (fv.status == FeasibilityVerdict::Status::ProvedInfeasible) {
                infeasible.push_back(labels);
                if (stats) {
                    ++stats->cycles_removed;
                    std::string desc;
                    for (const auto& s : labels) desc += (desc.empty() ? "" : "; ") + s.to_string();
                    stats->removed.push_back("(" + desc + ")^w: " + fv.reason);
                }
            }
        }
        if (infeasible.empty()) break;
        if (stats) ++stats->iterations_run;
        auto remap = [&](const std::vector<int>& origin, BuchiAutomaton<Statement> next) {
            std::vector<TransitionProvenance> prov;
            prov.reserve(origin.size());
            for (int li : origin)
                prov.push_back(cur.has_provenance()
                                   ? cur.provenance[static_cast<size_t>(li)]
                                   : TransitionProvenance{{cur.aut.transitions()[static_cast<size_t>(li)].label},
                                                          std::nullopt});
            cur.aut = std::move(next);
            cur.provenance = std::move(prov);
        };
        for (const auto& labels : infeasible) {
            BuchiAutomaton<Statement> tail_comp = cycle_tail_complement(labels, cur.aut.alphabet());
            std::vector<int> left;
            BuchiAutomaton<Statement> diff = intersect(cur.aut, tail_comp, &left);
            remap(left, std::move(diff));
            // keep the automaton small between subtractions; merged
            // transitions share one label, hence one provenance
            std::vector<int> to;
            BuchiAutomaton<Statement> trimmed = trim_productive(cur.aut, &to);
            remap(to, std::move(trimmed));
            std::vector<int> qo;
            BuchiAutomaton<Statement> quotiented = bisim_quotient(cur.aut, &qo);
            remap(qo, std::move(quotiented));
        }
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Bounded search for a provably feasible accepting lasso. A candidate is
// proved feasible when its stem-plus-iteration constraints are satisfiable
// and the loop either contains no assertions (assignments alone never block)
// or admits a stationary state (one iteration maps some reachable assignment
// back to itself). Anything else stays unknown.

struct LassoSearchOptions {
    int stem_bound = 8;
    int loop_bound = 8;
    long long candidate_budget = 4000;
};

namespace detail {

inline std::vector<Assignment> witness_steps(const WindowEncoding& enc, const std::map<VarId, BigInt>& model,
                                             const std::vector<Ident>& universe) {
    std::vector<Assignment> steps;
    for (const auto& level : enc.levels) {
        std::map<Ident, Value> m;
        for (const auto& id : universe) {
            auto it = model.find(level.at(id));
            m[id] = Value(it == model.end() ? BigInt(0) : it->second);
        }
        steps.emplace_back(std::move(m));
    }
    return steps;
}

inline void validate_witness(const ProgramAutomaton& ctx, const std::vector<Statement>& basics,
                             const std::vector<Assignment>& steps) {
    if (steps.size() != basics.size() + 1) throw Error("witness step count mismatch");
    for (size_t i = 0; i < basics.size(); ++i)
        if (!matches_step(steps[i], steps[i + 1], basics[i], ctx.cells))
            throw Error("witness fails matches_step validation at step " + std::to_string(i));
}

}  // namespace detail

inline FeasibilityVerdict find_feasible_lasso(const ProgramAutomaton& p, Solver& solver,
                                              const LassoSearchOptions& opts = {}) {
    FeasibilityVerdict out;
    out.bound = opts.stem_bound;
    auto first = is_empty(p.aut);
    if (!first) {
        out.status = FeasibilityVerdict::Status::ProvedInfeasible;
        out.reason = "automaton language is empty";
        return out;
    }

    std::set<std::string> tried;
    long long budget = opts.candidate_budget;

    auto try_candidate = [&](const Lasso<Statement>& cand) -> std::optional<FeasibilityVerdict> {
        std::string key;
        for (const auto& t : cand.stem) key += t.label.to_string() + ";";
        key += "|";
        for (const auto& t : cand.loop) key += t.label.to_string() + ";";
        if (!tried.insert(key).second) return std::nullopt;

        std::vector<Statement> stem_basics = flatten(cand.stem_labels());
        std::vector<Statement> loop_basics = flatten(cand.loop_labels());
        std::vector<Statement> once = stem_basics;
        once.insert(once.end(), loop_basics.begin(), loop_basics.end());
        WindowEncoding enc = encode_window(p, once, /*free_init=*/false);
        bool loop_assert_free = true;
        for (const auto& b : loop_basics)
            if (b.kind() == Statement::Kind::Assert) loop_assert_free = false;

        try {
            SolverAnswer ans = solver.check(enc.vars, enc.formula);
            if (ans.status == SatResult::Unsat) return std::nullopt;
            if (ans.status != SatResult::Sat) return std::nullopt;

            if (loop_assert_free) {
                // extend to two iterations for the reported witness prefix
                std::vector<Statement> twice = once;
                twice.insert(twice.end(), loop_basics.begin(), loop_basics.end());
                WindowEncoding enc2 = encode_window(p, twice, false);
                SolverAnswer ans2 = solver.check(enc2.vars, enc2.formula);
                const WindowEncoding& used = ans2.status == SatResult::Sat ? enc2 : enc;
                const auto& model = ans2.status == SatResult::Sat ? *ans2.model : *ans.model;
                const auto& basics = ans2.status == SatResult::Sat ? twice : once;
                FeasibilityVerdict v;
                v.status = FeasibilityVerdict::Status::ProvedFeasible;
                v.reason = "assert-free loop; assignments alone never block";
                LassoWitness w;
                w.lasso = cand;
                w.basic_steps = basics;
                w.steps = detail::witness_steps(used, model, p.universe());
                w.periodic = false;
                w.loop_start = stem_basics.size();
                detail::validate_witness(p, basics, w.steps);
                v.witness = std::move(w);
                return v;
            }

            // stationary loop: one iteration maps some reachable state to itself
            std::vector<LinFormula> conj{enc.formula};
            size_t s_level = stem_basics.size();
            size_t e_level = once.size();
            for (const auto& id : p.universe())
                conj.push_back(LinFormula::eq(LinExpr::of_var(enc.at(id, s_level)),
                                              LinExpr::of_var(enc.at(id, e_level))));
            SolverAnswer st = solver.check(enc.vars, LinFormula::conj(std::move(conj)));
            if (st.status == SatResult::Sat && st.model) {
                FeasibilityVerdict v;
                v.status = FeasibilityVerdict::Status::ProvedFeasible;
                v.reason = "stationary loop; one iteration fixes the reached state";
                LassoWitness w;
                w.lasso = cand;
                w.basic_steps = once;
                w.steps = detail::witness_steps(enc, *st.model, p.universe());
                w.periodic = true;
                w.loop_start = stem_basics.size();
                detail::validate_witness(p, once, w.steps);
                v.witness = std::move(w);
                return v;
            }
        } catch (const SolverError&) {
            // candidate stays unknown
        }
        return std::nullopt;
    };

    if (auto v = try_candidate(*first)) return *v;

    // systematic exploration in order of total length
    for (int total = 1; total <= opts.stem_bound + opts.loop_bound; ++total) {
        for (int stem_len = 0; stem_len <= std::min(total - 1, opts.stem_bound); ++stem_len) {
            int loop_len = total - stem_len;
            if (loop_len > opts.loop_bound) continue;
            // enumerate stems (walks) of length stem_len from the initial state
            std::vector<Transition<Statement>> stem;
            std::function<std::optional<FeasibilityVerdict>(int, int)> walk_stem =
                [&](int state, int left) -> std::optional<FeasibilityVerdict> {
                if (--budget < 0) return std::nullopt;
                if (left == 0) {
                    // enumerate loops of length loop_len from `state` back to it
                    std::vector<Transition<Statement>> loop;
                    std::function<std::optional<FeasibilityVerdict>(int, int, bool)> walk_loop =
                        [&](int cur, int l_left, bool saw_acc) -> std::optional<FeasibilityVerdict> {
                        if (--budget < 0) return std::nullopt;
                        if (l_left == 0) {
                            if (cur != state || !(saw_acc || p.aut.is_accepting(state))) return std::nullopt;
                            Lasso<Statement> cand;
                            cand.stem = stem;
                            cand.loop = loop;
                            return try_candidate(cand);
                        }
                        for (int ti : p.aut.out(cur)) {
                            const auto& t = p.aut.transitions()[static_cast<size_t>(ti)];
                            loop.push_back(t);
                            auto r = walk_loop(t.to, l_left - 1, saw_acc || p.aut.is_accepting(t.to));
                            loop.pop_back();
                            if (r) return r;
                        }
                        return std::nullopt;
                    };
                    return walk_loop(state, loop_len, false);
                }
                for (int ti : p.aut.out(state)) {
                    const auto& t = p.aut.transitions()[static_cast<size_t>(ti)];
                    stem.push_back(t);
                    auto r = walk_stem(t.to, left - 1);
                    stem.pop_back();
                    if (r) return r;
                }
                return std::nullopt;
            };
            if (auto v = walk_stem(p.aut.initial(), stem_len)) return *v;
            if (budget < 0) break;
        }
        if (budget < 0) break;
    }
    out.status = FeasibilityVerdict::Status::Unknown;
    out.reason = budget < 0 ? "candidate budget exhausted" : "no candidate proved feasible within bounds";
    return out;
}

}  // namespace hytsl
