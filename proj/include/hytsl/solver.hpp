#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "hytsl/linear.hpp"
#include "hytsl/process.hpp"

namespace hytsl {

enum class SatResult { Sat, Unsat, Unknown };

struct SolverAnswer {
    SatResult status = SatResult::Unknown;
    std::optional<std::map<VarId, BigInt>> model;
    std::string info;
};

// Decision back end for quantifier-free LIA queries. Implementations may
// throw SolverError; callers map failures to their conservative side.
class Solver {
public:
    virtual ~Solver() = default;
    virtual SolverAnswer check(const VarTable& vars, const LinFormula& formula) = 0;
};

// ---------------------------------------------------------------------------
// Built-in solver: literal branching over the boolean structure with an
// Omega-test elimination core deciding each conjunction of linear atoms.
// An optional value bound B conjoins -B <= x <= B for every variable of the
// query, which is the "bounded-domain" mode the CLI exposes.

class InternalSolver : public Solver {
public:
    explicit InternalSolver(std::optional<long long> value_bound = std::nullopt,
                            long long branch_budget = 200000)
        : value_bound_(value_bound), branch_budget_(branch_budget) {}

    SolverAnswer check(const VarTable& /*vars*/, const LinFormula& formula) override {
        std::vector<LinAtom> conj;
        if (value_bound_) {
            std::map<VarId, bool> seen;
            formula.for_each_var([&](VarId v) { seen[v] = true; });
            BigInt b(*value_bound_);
            for (const auto& [v, _] : seen) {
                conj.push_back(LinAtom{LinExpr::of_var(v) + LinExpr::of_const(b), LinRel::Ge0});
                conj.push_back(LinAtom{LinExpr::of_const(b) - LinExpr::of_var(v), LinRel::Ge0});
            }
        }
        budget_left_ = branch_budget_;
        std::vector<std::pair<LinFormula, bool>> work{{formula, false}};
        auto model = search(std::move(work), std::move(conj));
        SolverAnswer ans;
        if (model) {
            ans.status = SatResult::Sat;
            ans.model = std::move(*model);
        } else {
            ans.status = SatResult::Unsat;
        }
        return ans;
    }

private:
    std::optional<long long> value_bound_;
    long long branch_budget_;
    long long budget_left_ = 0;

    void spend() {
        if (--budget_left_ < 0) throw SolverError("internal solver branch budget exceeded");
    }

    static LinAtom negate_ge(const LinAtom& a) {
        // !(e >= 0)  <=>  -e - 1 >= 0
        return LinAtom{a.expr.scaled(BigInt(-1)) - LinExpr::of_const(BigInt(1)), LinRel::Ge0};
    }

    // Worklist DFS over the boolean structure; each entry carries a negation
    // polarity. Recursion happens only at disjunction points. A finished
    // branch hands its atom conjunction to the Omega core.
    std::optional<std::map<VarId, BigInt>> search(std::vector<std::pair<LinFormula, bool>> work,
                                                  std::vector<LinAtom> conj) {
        using K = LinFormula::Kind;
        while (!work.empty()) {
            spend();
            auto [f, neg] = std::move(work.back());
            work.pop_back();
            switch (f.kind()) {
                case K::True:
                    if (neg) return std::nullopt;
                    break;
                case K::False:
                    if (!neg) return std::nullopt;
                    break;
                case K::Not:
                    work.emplace_back(f.children()[0], !neg);
                    break;
                case K::And:
                case K::Or: {
                    bool and_like = (f.kind() == K::And) != neg;
                    if (and_like) {
                        for (const auto& ch : f.children()) work.emplace_back(ch, neg);
                        break;
                    }
                    for (const auto& ch : f.children()) {
                        auto w2 = work;
                        w2.emplace_back(ch, neg);
                        if (auto m = search(std::move(w2), conj)) return m;
                    }
                    return std::nullopt;
                }
                case K::Atom: {
                    const LinAtom& a = f.atom_value();
                    if (!neg) {
                        conj.push_back(a);
                    } else if (a.rel == LinRel::Ge0) {
                        conj.push_back(negate_ge(a));
                    } else {
                        // !(e = 0)  <=>  e >= 1  or  e <= -1
                        auto w2 = work;
                        auto c2 = conj;
                        c2.push_back(LinAtom{a.expr - LinExpr::of_const(BigInt(1)), LinRel::Ge0});
                        if (auto m = search(std::move(w2), std::move(c2))) return m;
                        conj.push_back(LinAtom{a.expr.scaled(BigInt(-1)) - LinExpr::of_const(BigInt(1)), LinRel::Ge0});
                    }
                    break;
                }
            }
        }
        return omega_sat(std::move(conj));
    }

    // ---- Omega test over a conjunction -----------------------------------

    // One elimination event; back-substitution replays these in reverse, so
    // the interleaving of equality substitutions and inequality eliminations
    // must be preserved.
    struct ElimEvent {
        VarId var;
        bool is_subst;
        LinExpr expr;                                    // subst case
        std::vector<std::pair<BigInt, LinExpr>> lowers;  // a*x >= p  (a > 0)
        std::vector<std::pair<BigInt, LinExpr>> uppers;  // b*x <= q  (b > 0)
    };

    std::optional<std::map<VarId, BigInt>> omega_sat(std::vector<LinAtom> atoms) {
        std::vector<LinExpr> eqs;
        std::vector<LinExpr> ges;
        for (auto& a : atoms)
            (a.rel == LinRel::Eq0 ? eqs : ges).push_back(std::move(a.expr));

        // Alias pre-pass: step encodings are dominated by frame equalities
        // x@i = x@i-1 and by pinned initials x@0 = c. Union-find collapses
        // them in one sweep instead of one substitution round each.
        std::map<VarId, VarId> parent;
        std::map<VarId, BigInt> pin;  // keyed by representative
        std::function<VarId(VarId)> find = [&](VarId v) -> VarId {
            auto it = parent.find(v);
            if (it == parent.end() || it->second == v) return v;
            VarId r = find(it->second);
            parent[v] = r;
            return r;
        };
        auto pin_rep = [&](VarId r, const BigInt& val) {
            auto it = pin.find(r);
            if (it == pin.end()) {
                pin.emplace(r, val);
                return true;
            }
            return it->second == val;
        };
        std::vector<LinExpr> rest_eqs;
        for (auto& e : eqs) {
            bool unsat = false;
            normalize_eq(e, unsat);
            if (unsat) return std::nullopt;
            if (e.coeff.empty()) continue;
            if (e.coeff.size() == 1) {
                auto [v, c] = *e.coeff.begin();
                if (c.abs().is_one()) {
                    // c*x + k = 0  =>  x = -k*c
                    if (!pin_rep(find(v), (-e.constant) * c)) return std::nullopt;
                    continue;
                }
            } else if (e.coeff.size() == 2 && e.constant.is_zero()) {
                auto it = e.coeff.begin();
                auto [v1, c1] = *it;
                auto [v2, c2] = *std::next(it);
                if (c1.abs().is_one() && (c1 + c2).is_zero()) {
                    VarId r1 = find(v1), r2 = find(v2);
                    if (r1 != r2) {
                        auto p1 = pin.find(r1);
                        auto p2 = pin.find(r2);
                        if (p1 != pin.end() && p2 != pin.end() && !(p1->second == p2->second))
                            return std::nullopt;
                        parent[r1] = r2;
                        if (p1 != pin.end()) {
                            BigInt val = p1->second;
                            pin.erase(r1);
                            if (!pin_rep(r2, val)) return std::nullopt;
                        }
                    }
                    continue;
                }
            }
            rest_eqs.push_back(std::move(e));
        }
        auto rewrite = [&](const LinExpr& e) {
            LinExpr r;
            r.constant = e.constant;
            for (const auto& [v, c] : e.coeff) {
                VarId rep = find(v);
                auto it = pin.find(rep);
                if (it != pin.end())
                    r.constant += c * it->second;
                else
                    r.add_coeff(rep, c);
            }
            return r;
        };
        for (auto& e : rest_eqs) e = rewrite(e);
        for (auto& g : ges) g = rewrite(g);

        std::vector<ElimEvent> events;
        int internal = 0;
        if (!omega_rec(std::move(rest_eqs), std::move(ges), events, internal, 0)) return std::nullopt;
        std::map<VarId, BigInt> model;
        for (auto it = events.rbegin(); it != events.rend(); ++it) {
            if (it->is_subst) {
                model[it->var] = it->expr.eval(model);
                continue;
            }
            BigInt lo, hi;
            bool has_lo = false, has_hi = false;
            for (const auto& [a, p] : it->lowers) {
                BigInt v = -BigInt::floor_div(-p.eval(model), a);  // ceil(p/a)
                if (!has_lo || v > lo) lo = v;
                has_lo = true;
            }
            for (const auto& [b, q] : it->uppers) {
                BigInt v = BigInt::floor_div(q.eval(model), b);
                if (!has_hi || v < hi) hi = v;
                has_hi = true;
            }
            BigInt pick(0);
            if (has_lo && has_hi) {
                if (lo > hi) throw Error("omega back-substitution produced an empty interval");
                pick = (BigInt(0) >= lo && BigInt(0) <= hi) ? BigInt(0) : (lo > BigInt(0) ? lo : hi);
            } else if (has_lo) {
                pick = lo > BigInt(0) ? lo : BigInt(0);
            } else if (has_hi) {
                pick = hi < BigInt(0) ? hi : BigInt(0);
            }
            model[it->var] = pick;
        }
        // resolve aliases and pins
        for (const auto& [r, val] : pin) model[r] = val;
        for (const auto& [v, p] : parent) {
            VarId r = find(v);
            auto it = model.find(r);
            model[v] = it == model.end() ? BigInt(0) : it->second;
        }
        return model;
    }

    static void normalize_eq(LinExpr& e, bool& unsat) {
        if (e.coeff.empty()) {
            unsat = !e.constant.is_zero();
            return;
        }
        BigInt g(0);
        for (const auto& [v, c] : e.coeff) g = BigInt::gcd(g, c);
        if (g.is_one()) return;
        BigInt q, r;
        BigInt::divmod_trunc(e.constant, g, q, r);
        if (!r.is_zero()) {
            unsat = true;
            return;
        }
        for (auto& [v, c] : e.coeff) c = BigInt::div_exact(c, g);
        e.constant = q;
    }

    static void normalize_ge(LinExpr& e) {
        if (e.coeff.empty()) return;
        BigInt g(0);
        for (const auto& [v, c] : e.coeff) g = BigInt::gcd(g, c);
        if (g.is_one()) return;
        for (auto& [v, c] : e.coeff) c = BigInt::div_exact(c, g);
        e.constant = BigInt::floor_div(e.constant, g);  // tightening
    }

    // symmetric residue in (-m/2, m/2]
    static BigInt mod_hat(const BigInt& a, const BigInt& m) {
        BigInt two(2);
        BigInt r = a - m * BigInt::floor_div(two * a + m, two * m);
        return r;
    }

    bool omega_rec(std::vector<LinExpr> eqs, std::vector<LinExpr> ges, std::vector<ElimEvent>& events,
                   int& internal, int depth) {
        spend();
        if (depth > 256) throw SolverError("omega recursion depth exceeded");

        // equality elimination
        while (!eqs.empty()) {
            bool unsat = false;
            normalize_eq(eqs.back(), unsat);
            if (unsat) return false;
            LinExpr e = eqs.back();
            if (e.coeff.empty()) {
                eqs.pop_back();
                continue;
            }
            // prefer a unit coefficient
            VarId unit_var = -1;
            BigInt unit_c;
            BigInt min_abs;
            bool have_min = false;
            for (const auto& [v, c] : e.coeff) {
                BigInt a = c.abs();
                if (a.is_one() && unit_var < 0) {
                    unit_var = v;
                    unit_c = c;
                }
                if (!have_min || a < min_abs) {
                    min_abs = a;
                    have_min = true;
                }
            }
            if (unit_var >= 0) {
                eqs.pop_back();
                // c*x + rest = 0, |c| = 1  =>  x = -c*rest
                LinExpr rest = e;
                rest.coeff.erase(unit_var);
                LinExpr x_expr = rest.scaled(-unit_c);
                for (auto& other : eqs) other = other.substituted(unit_var, x_expr);
                for (auto& other : ges) other = other.substituted(unit_var, x_expr);
                events.push_back(ElimEvent{unit_var, true, std::move(x_expr), {}, {}});
                continue;
            }
            // Pugh's coefficient reduction: introduce sigma with
            //   m*sigma = sum mod_hat(a_i) x_i + mod_hat(c),  m = |a_k| + 1,
            // whose coefficient on x_k is -sign(a_k), i.e. a unit.
            BigInt m = min_abs + BigInt(1);
            VarId sigma = sigma_var(internal);
            LinExpr reduced;
            for (const auto& [v, c] : e.coeff) reduced.add_coeff(v, mod_hat(c, m));
            reduced.constant = mod_hat(e.constant, m);
            reduced.add_coeff(sigma, -m);
            eqs.push_back(std::move(reduced));
        }

        // drop trivially-true constant inequalities, detect constant conflicts
        std::vector<LinExpr> live;
        for (auto& g : ges) {
            normalize_ge(g);
            if (g.coeff.empty()) {
                if (g.constant.is_negative()) return false;
                continue;
            }
            live.push_back(std::move(g));
        }
        if (live.empty()) return true;

        // choose the elimination variable: fewest lower*upper pairs, ties by id
        std::map<VarId, std::pair<int, int>> counts;
        for (const auto& g : live)
            for (const auto& [v, c] : g.coeff)
                (c.is_negative() ? counts[v].second : counts[v].first)++;
        VarId best = -1;
        long long best_cost = 0;
        for (const auto& [v, lu] : counts) {
            long long cost = static_cast<long long>(lu.first) * lu.second;
            if (best < 0 || cost < best_cost) {
                best = v;
                best_cost = cost;
            }
        }

        ElimEvent elim;
        elim.var = best;
        elim.is_subst = false;
        std::vector<LinExpr> others;
        for (const auto& g : live) {
            auto it = g.coeff.find(best);
            if (it == g.coeff.end()) {
                others.push_back(g);
                continue;
            }
            LinExpr rest = g;
            rest.coeff.erase(best);
            if (it->second.is_negative()) {
                // a*x + rest >= 0 with a<0:  (-a)*x <= rest
                elim.uppers.emplace_back(-it->second, rest);
            } else {
                // a*x + rest >= 0:  a*x >= -rest
                elim.lowers.emplace_back(it->second, rest.scaled(BigInt(-1)));
            }
        }

        if (elim.lowers.empty() || elim.uppers.empty()) {
            // unbounded on one side: always satisfiable in x
            events.push_back(std::move(elim));
            bool ok = omega_rec({}, std::move(others), events, internal, depth + 1);
            if (!ok) events.pop_back();
            return ok;
        }

        bool all_exact = true;
        BigInt bmax(0);
        for (const auto& [b, q] : elim.uppers)
            if (b > bmax) bmax = b;
        for (const auto& [a, p] : elim.lowers)
            for (const auto& [b, q] : elim.uppers)
                if (!a.is_one() && !b.is_one()) all_exact = false;

        auto shadows = [&](bool dark) {
            std::vector<LinExpr> sh = others;
            for (const auto& [a, p] : elim.lowers)
                for (const auto& [b, q] : elim.uppers) {
                    LinExpr s = q.scaled(a) - p.scaled(b);
                    if (dark) s.constant -= (a - BigInt(1)) * (b - BigInt(1));
                    sh.push_back(std::move(s));
                }
            return sh;
        };

        if (all_exact) {
            events.push_back(elim);
            bool ok = omega_rec({}, shadows(false), events, internal, depth + 1);
            if (!ok) events.pop_back();
            return ok;
        }

        // full Omega: real shadow refutes, dark shadow proves, otherwise splinter
        {
            std::vector<ElimEvent> ev2 = events;
            int i2 = internal;
            if (!omega_rec({}, shadows(false), ev2, i2, depth + 1)) return false;
        }
        {
            std::vector<ElimEvent> ev2 = events;
            ev2.push_back(elim);
            int i2 = internal;
            if (omega_rec({}, shadows(true), ev2, i2, depth + 1)) {
                events = std::move(ev2);
                internal = i2;
                return true;
            }
        }
        for (const auto& [a, p] : elim.lowers) {
            // candidate hyperplanes a*x = p + j
            BigInt jmax = BigInt::floor_div(a * bmax - a - bmax, bmax);
            for (BigInt j(0); j <= jmax; j += BigInt(1)) {
                LinExpr e = p;
                e.constant += j;
                e.add_coeff(best, -a);
                std::vector<LinExpr> eq1{e.scaled(BigInt(-1))};  // a*x - (p+j) = 0
                std::vector<ElimEvent> ev2 = events;
                int i2 = internal;
                std::vector<LinExpr> g2 = live;
                if (omega_rec(std::move(eq1), std::move(g2), ev2, i2, depth + 1)) {
                    events = std::move(ev2);
                    internal = i2;
                    return true;
                }
            }
        }
        return false;
    }

    // Internal variables introduced by the equality reduction get ids above
    // any table id; they are dropped from reported models by callers keying
    // on their own VarIds.
    VarId sigma_var(int& internal) { return 1 << 28 | internal++; }
};

// ---------------------------------------------------------------------------
// SMT-LIB v2 subprocess client. One child process per query: the query text
// is written to stdin, the reply read from stdout until EOF, with a deadline.

class Smt2Solver : public Solver {
public:
    explicit Smt2Solver(std::string command, int timeout_ms = 5000)
        : command_(std::move(command)), timeout_ms_(timeout_ms) {}

    SolverAnswer check(const VarTable& vars, const LinFormula& formula) override {
        std::string query = render(vars, formula);
        ProcessResult pr = run_process(command_, query, timeout_ms_);
        if (pr.timed_out) throw SolverError("solver timed out: " + command_);
        return parse_reply(vars, pr.output);
    }

    static std::string render(const VarTable& vars, const LinFormula& formula) {
        std::ostringstream os;
        os << "(set-logic QF_LIA)\n(set-option :produce-models true)\n";
        std::map<VarId, bool> used;
        formula.for_each_var([&](VarId v) { used[v] = true; });
        for (const auto& [v, _] : used) os << "(declare-const " << smt_name(vars, v) << " Int)\n";
        os << "(assert " << render_formula(vars, formula) << ")\n(check-sat)\n(get-model)\n";
        return os.str();
    }

private:
    std::string command_;
    int timeout_ms_;

    static std::string smt_name(const VarTable& vars, VarId v) {
        return "|" + vars.name(v) + "|";  // names may contain [ ] @, so always quote
    }

    static std::string render_int(const BigInt& b) {
        if (b.is_negative()) return "(- " + (-b).to_string() + ")";
        return b.to_string();
    }

    static std::string render_expr(const VarTable& vars, const LinExpr& e) {
        std::vector<std::string> parts;
        for (const auto& [v, c] : e.coeff) {
            if (c.is_one())
                parts.push_back(smt_name(vars, v));
            else
                parts.push_back("(* " + render_int(c) + " " + smt_name(vars, v) + ")");
        }
        if (!e.constant.is_zero() || parts.empty()) parts.push_back(render_int(e.constant));
        if (parts.size() == 1) return parts[0];
        std::string s = "(+";
        for (const auto& p : parts) s += " " + p;
        return s + ")";
    }

    static std::string render_formula(const VarTable& vars, const LinFormula& f) {
        using K = LinFormula::Kind;
        switch (f.kind()) {
            case K::True: return "true";
            case K::False: return "false";
            case K::Atom: {
                const auto& a = f.atom_value();
                const char* op = a.rel == LinRel::Ge0 ? ">=" : "=";
                return std::string("(") + op + " " + render_expr(vars, a.expr) + " 0)";
            }
            case K::Not:
                return "(not " + render_formula(vars, f.children()[0]) + ")";
            case K::And:
            case K::Or: {
                std::string s = f.kind() == K::And ? "(and" : "(or";
                for (const auto& ch : f.children()) s += " " + render_formula(vars, ch);
                return s + ")";
            }
        }
        return "true";
    }

    SolverAnswer parse_reply(const VarTable& vars, const std::string& out) {
        std::vector<std::string> toks = tokenize(out);
        size_t i = 0;
        while (i < toks.size() && toks[i] != "sat" && toks[i] != "unsat" && toks[i] != "unknown") ++i;
        if (i == toks.size()) throw SolverError("unparseable solver reply: " + out.substr(0, 200));
        SolverAnswer ans;
        if (toks[i] == "unsat") {
            ans.status = SatResult::Unsat;
            return ans;
        }
        if (toks[i] == "unknown") {
            ans.status = SatResult::Unknown;
            return ans;
        }
        ans.status = SatResult::Sat;
        std::map<std::string, VarId> by_name;
        for (VarId v = 0; v < vars.size(); ++v) by_name[vars.name(v)] = v;
        std::map<VarId, BigInt> model;
        for (size_t j = i; j + 4 < toks.size(); ++j) {
            if (toks[j] != "define-fun") continue;
            const std::string& name = toks[j + 1];
            auto it = by_name.find(name);
            if (it == by_name.end()) continue;
            // shape: define-fun NAME ( ) Int VALUE   (value may be ( - N ))
            size_t k = j + 2;
            if (k < toks.size() && toks[k] == "(") ++k;
            if (k < toks.size() && toks[k] == ")") ++k;
            if (k < toks.size() && toks[k] == "Int") ++k;
            bool negated = false;
            if (k < toks.size() && toks[k] == "(") {
                ++k;
                if (k < toks.size() && toks[k] == "-") {
                    negated = true;
                    ++k;
                }
            }
            if (k >= toks.size()) continue;
            try {
                BigInt v = BigInt::from_string(toks[k]);
                model[it->second] = negated ? -v : v;
            } catch (const Error&) {
                continue;
            }
        }
        ans.model = std::move(model);
        return ans;
    }

    static std::vector<std::string> tokenize(const std::string& s) {
        std::vector<std::string> toks;
        size_t i = 0;
        while (i < s.size()) {
            char c = s[i];
            if (c == '(' || c == ')') {
                toks.emplace_back(1, c);
                ++i;
            } else if (c == '|') {
                size_t j = s.find('|', i + 1);
                if (j == std::string::npos) break;
                toks.push_back(s.substr(i + 1, j - i - 1));
                i = j + 1;
            } else if (isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else {
                size_t j = i;
                while (j < s.size() && !isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')' &&
                       s[j] != '|')
                    ++j;
                toks.push_back(s.substr(i, j - i));
                i = j;
            }
        }
        return toks;
    }
};

}  // namespace hytsl
