#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hytsl/buchi.hpp"
#include "hytsl/formula.hpp"
#include "hytsl/terms.hpp"
#include "hytsl/valuation.hpp"

namespace hytsl {

// ---------------------------------------------------------------------------
// Program statements: assert, assignment, nondeterministic assignment and
// sequencing. Value type with structural equality; seq trees are kept in
// right-nested canonical form so printing is injective.

class Statement {
public:
    enum class Kind { Assert, Assign, Havoc, Seq };

    Statement() : Statement(assertion(Term::constant(Value::boolean(true)))) {}

    static Statement assertion(Term pred) {
        if (!is_boolean_sorted(pred)) throw SortMismatch("assert needs a boolean term: " + pred.to_string());
        auto n = std::make_shared<Node>();
        n->kind = Kind::Assert;
        n->term = std::move(pred);
        return Statement(std::move(n));
    }
    static Statement assign(Ident cell, Term src) {
        if (cell.kind != VarKind::Cell) throw ValidationError("assignment target must be a cell: " + cell.to_string());
        if (sort_of(src) != Sort::Int) throw SortMismatch("assignment source must be integer-sorted: " + src.to_string());
        auto n = std::make_shared<Node>();
        n->kind = Kind::Assign;
        n->cell = std::move(cell);
        n->term = std::move(src);
        return Statement(std::move(n));
    }
    static Statement havoc(Ident cell) {
        if (cell.kind != VarKind::Cell) throw ValidationError("havoc target must be a cell: " + cell.to_string());
        auto n = std::make_shared<Node>();
        n->kind = Kind::Havoc;
        n->cell = std::move(cell);
        return Statement(std::move(n));
    }
    static Statement seq(Statement a, Statement b) {
        // canonical right fold: (a;b);c becomes a;(b;c)
        if (a.kind() == Kind::Seq) return seq(a.first(), seq(a.second(), std::move(b)));
        auto n = std::make_shared<Node>();
        n->kind = Kind::Seq;
        n->children = {std::move(a), std::move(b)};
        return Statement(std::move(n));
    }
    static Statement seq_of(const std::vector<Statement>& parts) {
        if (parts.empty()) throw Error("empty statement sequence");
        Statement r = parts.back();
        for (size_t i = parts.size() - 1; i-- > 0;) r = seq(parts[i], r);
        return r;
    }

    Kind kind() const { return n_->kind; }
    bool is_basic() const { return kind() != Kind::Seq; }
    const Term& pred() const { return n_->term; }
    const Ident& cell() const { return n_->cell; }
    const Term& source() const { return n_->term; }
    const Statement& first() const { return n_->children[0]; }
    const Statement& second() const { return n_->children[1]; }

    std::string to_string() const {
        switch (kind()) {
            case Kind::Assert: return "assert(" + pred().to_string() + ")";
            case Kind::Assign: return cell().to_string() + " := " + source().to_string();
            case Kind::Havoc: return cell().to_string() + " := *";
            case Kind::Seq: return first().to_string() + "; " + second().to_string();
        }
        return "?";
    }

    friend bool operator==(const Statement& a, const Statement& b) { return compare(a, b) == 0; }
    friend bool operator<(const Statement& a, const Statement& b) { return compare(a, b) < 0; }

    static int compare(const Statement& a, const Statement& b) {
        if (a.n_ == b.n_) return 0;
        if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
        switch (a.kind()) {
            case Kind::Assert: return Term::compare(a.pred(), b.pred());
            case Kind::Assign: {
                auto c = a.cell() <=> b.cell();
                if (c != 0) return c < 0 ? -1 : 1;
                return Term::compare(a.source(), b.source());
            }
            case Kind::Havoc: {
                auto c = a.cell() <=> b.cell();
                return c < 0 ? -1 : c > 0 ? 1 : 0;
            }
            case Kind::Seq: {
                if (int c = compare(a.first(), b.first())) return c;
                return compare(a.second(), b.second());
            }
        }
        return 0;
    }

    template <class F>
    void for_each_var(F&& f) const {
        switch (kind()) {
            case Kind::Assert: pred().for_each_var(f); return;
            case Kind::Assign:
                f(cell());
                source().for_each_var(f);
                return;
            case Kind::Havoc: f(cell()); return;
            case Kind::Seq:
                first().for_each_var(f);
                second().for_each_var(f);
                return;
        }
    }

    Statement map_idents(const std::function<Ident(const Ident&)>& f) const {
        switch (kind()) {
            case Kind::Assert: return assertion(pred().map_vars(f));
            case Kind::Assign: return assign(f(cell()), source().map_vars(f));
            case Kind::Havoc: return havoc(f(cell()));
            case Kind::Seq: return seq(first().map_idents(f), second().map_idents(f));
        }
        throw Error("unreachable");
    }

    Statement renamed(const std::string& trace) const {
        return map_idents([&](const Ident& id) {
            if (!id.trace.empty()) throw ValidationError("identifier already trace-indexed: " + id.to_string());
            return id.with_trace(trace);
        });
    }

    Statement trace_stripped() const {
        return map_idents([](const Ident& id) { return id.without_trace(); });
    }

private:
    struct Node {
        Kind kind = Kind::Assert;
        Term term;
        Ident cell;
        std::vector<Statement> children;
    };
    std::shared_ptr<const Node> n_;
    explicit Statement(std::shared_ptr<const Node> n) : n_(std::move(n)) {}
};

inline void flatten_into(const Statement& s, std::vector<Statement>& out) {
    if (s.kind() == Statement::Kind::Seq) {
        flatten_into(s.first(), out);
        flatten_into(s.second(), out);
    } else {
        out.push_back(s);
    }
}

inline std::vector<Statement> flatten(const Statement& s) {
    std::vector<Statement> out;
    flatten_into(s, out);
    return out;
}

inline std::vector<Statement> flatten(const std::vector<Statement>& seq) {
    std::vector<Statement> out;
    for (const auto& s : seq) flatten_into(s, out);
    return out;
}

// ---------------------------------------------------------------------------
// Def. 5 matching of one basic statement between two consecutive assignments.
// Inputs are unconstrained; frame conditions range over the declared cells.

inline bool matches_step(const Assignment& prev, const Assignment& cur, const Statement& s,
                         const std::vector<Ident>& cells) {
    auto frames_hold = [&](const std::optional<Ident>& written) {
        for (const auto& c : cells) {
            if (written && c == *written) continue;
            if (!(cur.at(c) == prev.at(c))) return false;
        }
        return true;
    };
    switch (s.kind()) {
        case Statement::Kind::Assert:
            return evaluate(s.pred(), prev).as_bool() && frames_hold(std::nullopt);
        case Statement::Kind::Assign:
            return evaluate(s.source(), prev) == cur.at(s.cell()) && frames_hold(s.cell());
        case Statement::Kind::Havoc:
            return frames_hold(s.cell());
        case Statement::Kind::Seq:
            throw Error("matches_step needs a basic statement");
    }
    return false;
}

// ---------------------------------------------------------------------------
// Program automata: Büchi automata over statements plus declarations. The
// `initial` assignment pins cells only; inputs are free at every index,
// including -1. Transition provenance carries, per transition, the tuple of
// per-trace statements and the formula label it was combined with.

struct TransitionProvenance {
    std::vector<Statement> tuple;       // per-trace statements, renamed
    std::optional<Valuation> label;     // combined-product formula label
};

struct ProgramAutomaton {
    BuchiAutomaton<Statement> aut;
    std::vector<Ident> cells;
    std::vector<Ident> inputs;
    Assignment initial;  // over (a subset of) cells
    std::vector<std::string> trace_names;                 // nonempty after self-composition
    std::vector<TransitionProvenance> provenance;         // aligned with aut.transitions()
    bool system_mode = false;

    bool has_provenance() const { return provenance.size() == aut.transitions().size(); }

    std::vector<Ident> universe() const {
        std::vector<Ident> r = cells;
        r.insert(r.end(), inputs.begin(), inputs.end());
        return r;
    }
};

// ---------------------------------------------------------------------------
// File format (line oriented):
//   cells: n, p
//   inputs: i
//   init: n = 0, p = 0
//   state q0 initial accepting
//   trans q0 -> q1 : assert(i < 0)
// Comments start with '#'. Sequencing inside one label via ';'.

namespace detail {

inline Statement parse_statement(Lexer& lx, const IdentResolver& resolve) {
    std::vector<Statement> parts;
    for (;;) {
        const Token& t = lx.peek();
        if (t.kind == Tok::Ident && t.text == "assert") {
            lx.next();
            lx.expect(Tok::LParen, "'('");
            TermParser tp(lx, resolve);
            Term p = tp.parse_or();
            lx.expect(Tok::RParen, "')'");
            parts.push_back(Statement::assertion(p));
        } else if (t.kind == Tok::Ident) {
            std::string name = lx.next().text;
            std::string trace;
            if (lx.accept(Tok::LBracket)) {
                trace = lx.expect(Tok::Ident, "trace variable").text;
                lx.expect(Tok::RBracket, "']'");
            }
            lx.expect(Tok::Assign, "':='");
            Ident target = resolve(name, trace);
            if (lx.accept(Tok::Star)) {
                parts.push_back(Statement::havoc(target));
            } else {
                TermParser tp(lx, resolve);
                parts.push_back(Statement::assign(target, tp.parse_or()));
            }
        } else {
            lx.fail("expected a statement");
        }
        if (!lx.accept(Tok::Semi)) break;
    }
    return Statement::seq_of(parts);
}

}  // namespace detail

inline Statement parse_statement_text(const std::string& text, const IdentResolver& resolve) {
    Lexer lx(text);
    Statement s = detail::parse_statement(lx, resolve);
    if (!lx.at_end()) lx.fail("trailing input after statement");
    return s;
}

inline ProgramAutomaton parse_program_automaton(const std::string& text, bool system_mode = true) {
    ProgramAutomaton pa;
    pa.system_mode = system_mode;
    std::set<std::string> cell_names, input_names;
    std::map<std::string, int> state_ids;
    std::optional<std::string> initial_state;
    std::map<Ident, Value> init_map;
    struct RawTrans {
        std::string from, to, label;
        int line;
    };
    std::vector<RawTrans> raw_trans;

    IdentResolver resolve = [&](const std::string& name, const std::string& trace) -> Ident {
        if (!trace.empty()) throw ValidationError("trace-indexed identifier " + name + "[" + trace + "] in a program file");
        if (cell_names.count(name)) return Ident{name, VarKind::Cell, ""};
        if (input_names.count(name)) return Ident{name, VarKind::Input, ""};
        throw ValidationError("undeclared identifier " + name);
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    auto split_names = [&](const std::string& rest, std::set<std::string>& out) {
        Lexer lx(rest);
        if (lx.at_end()) return;
        for (;;) {
            std::string n = lx.expect(Tok::Ident, "identifier").text;
            if (!out.insert(n).second) throw ValidationError("duplicate declaration of " + n);
            if (!lx.accept(Tok::Comma)) break;
        }
        if (!lx.at_end()) lx.fail("trailing input in declaration");
    };

    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.rfind("cells:", 0) == 0) {
            split_names(line.substr(6), cell_names);
            for (const auto& n : cell_names)
                if (input_names.count(n)) throw ValidationError(n + " declared as both cell and input");
        } else if (line.rfind("inputs:", 0) == 0) {
            split_names(line.substr(7), input_names);
            for (const auto& n : input_names)
                if (cell_names.count(n)) throw ValidationError(n + " declared as both cell and input");
        } else if (line.rfind("init:", 0) == 0) {
            Lexer lx(line.substr(5));
            if (!lx.at_end()) {
                for (;;) {
                    std::string n = lx.expect(Tok::Ident, "cell name").text;
                    lx.expect(Tok::Eq, "'='");
                    bool neg = lx.accept(Tok::Minus);
                    std::string num = lx.expect(Tok::Int, "integer").text;
                    if (!cell_names.count(n))
                        throw ValidationError("init pins " + n + ", which is not a declared cell");
                    BigInt v = BigInt::from_string(num);
                    init_map[Ident{n, VarKind::Cell, ""}] = Value(neg ? -v : v);
                    if (!lx.accept(Tok::Comma)) break;
                }
                if (!lx.at_end()) lx.fail("trailing input in init line");
            }
        } else if (line.rfind("state", 0) == 0) {
            Lexer lx(line.substr(5));
            std::string name = lx.expect(Tok::Ident, "state name").text;
            if (state_ids.count(name)) throw ValidationError("duplicate state " + name);
            bool initial = false, accepting = false;
            while (lx.peek().kind == Tok::Ident) {
                std::string flag = lx.next().text;
                if (flag == "initial")
                    initial = true;
                else if (flag == "accepting")
                    accepting = true;
                else
                    throw ValidationError("unknown state flag " + flag);
            }
            if (!lx.at_end()) lx.fail("trailing input in state line");
            int id = pa.aut.add_state(accepting, name);
            state_ids[name] = id;
            if (initial) {
                if (initial_state) throw ValidationError("two initial states: " + *initial_state + ", " + name);
                initial_state = name;
                pa.aut.set_initial(id);
            }
        } else if (line.rfind("trans", 0) == 0) {
            // defer: states may be declared later
            std::string rest = line.substr(5);
            size_t colon = rest.find(':');
            if (colon == std::string::npos) throw ParseError("missing ':' in trans line", line_no, 1);
            Lexer lx(rest.substr(0, colon));
            std::string from = lx.expect(Tok::Ident, "state name").text;
            lx.expect(Tok::RArrow, "'->'");
            std::string to = lx.expect(Tok::Ident, "state name").text;
            if (!lx.at_end()) lx.fail("trailing input before ':'");
            raw_trans.push_back(RawTrans{from, to, rest.substr(colon + 1), line_no});
        } else {
            throw ParseError("unrecognized line: " + line, line_no, 1);
        }
    }

    if (!initial_state) throw ValidationError("no initial state declared");
    for (const auto& rt : raw_trans) {
        auto f = state_ids.find(rt.from);
        auto t = state_ids.find(rt.to);
        if (f == state_ids.end()) throw ValidationError("undeclared state " + rt.from);
        if (t == state_ids.end()) throw ValidationError("undeclared state " + rt.to);
        Statement s = parse_statement_text(rt.label, resolve);
        if (system_mode && !s.is_basic())
            throw ValidationError("system models use basic statements only (line " + std::to_string(rt.line) + ")");
        pa.aut.add_transition(f->second, s, t->second);
    }
    if (system_mode) {
        for (int s = 0; s < pa.aut.num_states(); ++s)
            if (!pa.aut.is_accepting(s))
                throw ValidationError("non-accepting state " + pa.aut.name(s) + " in a system model");
    }
    for (const auto& n : cell_names) pa.cells.push_back(Ident{n, VarKind::Cell, ""});
    for (const auto& n : input_names) pa.inputs.push_back(Ident{n, VarKind::Input, ""});
    // unpinned cells default to zero
    for (const auto& c : pa.cells)
        if (!init_map.count(c)) init_map[c] = Value(0);
    pa.initial = Assignment(init_map);
    return pa;
}

// ---------------------------------------------------------------------------
// n-fold self-composition (full state space Q^n; labels are the per-trace
// renamed statements joined in order).

inline ProgramAutomaton self_compose(const ProgramAutomaton& p, int n, const std::vector<std::string>& traces) {
    if (!p.system_mode) throw ValidationError("self-composition expects a system-mode automaton");
    if (n < 1 || static_cast<size_t>(n) != traces.size()) throw Error("trace name count must equal n");
    ProgramAutomaton out;
    out.system_mode = true;
    out.trace_names = traces;

    int q = p.aut.num_states();
    long long total = 1;
    for (int i = 0; i < n; ++i) {
        total *= q;
        if (total > 200000) throw BudgetExceeded("self-composition state budget exceeded", total);
    }
    // state id: row-major over component states
    auto state_id = [&](const std::vector<int>& tuple) {
        long long id = 0;
        for (int c : tuple) id = id * q + c;
        return static_cast<int>(id);
    };
    std::vector<int> tuple(static_cast<size_t>(n), 0);
    for (long long i = 0; i < total; ++i) {
        long long rest = i;
        std::string name;
        for (int j = n - 1; j >= 0; --j) {
            tuple[static_cast<size_t>(j)] = static_cast<int>(rest % q);
            rest /= q;
        }
        for (int j = 0; j < n; ++j) {
            const std::string& cn = p.aut.name(tuple[static_cast<size_t>(j)]);
            name += cn.empty() ? "q" + std::to_string(tuple[static_cast<size_t>(j)]) : cn;
        }
        out.aut.add_state(true, name);  // all states accepting
    }
    out.aut.set_initial(state_id(std::vector<int>(static_cast<size_t>(n), p.aut.initial())));

    // declarations and initial assignment, renamed per trace
    std::map<Ident, Value> init;
    for (const auto& tr : traces) {
        for (const auto& c : p.cells) out.cells.push_back(c.with_trace(tr));
        for (const auto& i : p.inputs) out.inputs.push_back(i.with_trace(tr));
        for (const auto& [id, v] : p.initial.entries()) init[id.with_trace(tr)] = v;
    }
    std::sort(out.cells.begin(), out.cells.end());
    std::sort(out.inputs.begin(), out.inputs.end());
    out.initial = Assignment(init);

    // transitions: cartesian product of component moves
    std::map<Transition<Statement>, TransitionProvenance> prov;
    std::vector<int> cur(static_cast<size_t>(n), 0);
    std::function<void(int, std::vector<int>&, std::vector<int>&, std::vector<Statement>&)> emit =
        [&](int j, std::vector<int>& from, std::vector<int>& to, std::vector<Statement>& parts) {
            if (j == n) {
                Statement label = Statement::seq_of(parts);
                Transition<Statement> t{state_id(from), label, state_id(to)};
                out.aut.add_transition(t.from, t.label, t.to);
                prov.emplace(t, TransitionProvenance{parts, std::nullopt});
                return;
            }
            int s = from[static_cast<size_t>(j)];
            for (int ti : p.aut.out(s)) {
                const auto& tr = p.aut.transitions()[static_cast<size_t>(ti)];
                to[static_cast<size_t>(j)] = tr.to;
                parts.push_back(tr.label.renamed(traces[static_cast<size_t>(j)]));
                emit(j + 1, from, to, parts);
                parts.pop_back();
            }
        };
    std::vector<int> from(static_cast<size_t>(n), 0), to(static_cast<size_t>(n), 0);
    for (long long i = 0; i < total; ++i) {
        long long rest = i;
        for (int j = n - 1; j >= 0; --j) {
            from[static_cast<size_t>(j)] = static_cast<int>(rest % q);
            rest /= q;
        }
        std::vector<Statement> parts;
        emit(0, from, to, parts);
    }
    out.provenance.clear();
    for (const auto& t : out.aut.transitions()) out.provenance.push_back(prov.at(t));
    return out;
}

// ---------------------------------------------------------------------------
// combine: compile a statement and a formula-automaton label into one
// composed statement over the cell set C* = C ∪ I ∪ {__tmp_j}.
//
// Layout: save_values; (assign/havoc leaves of s); new_inputs; (assert leaves
// of s); check_preds; check_updates. Keeping the statement's assignments
// before new_inputs preserves the update-term semantics (sources read the
// old input generation); running its asserts after new_inputs puts the
// program's branch predicates and the label's predicates on the same input
// generation, which is what makes short infeasibility windows detect
// branch-vs-label conflicts.

inline Ident tmp_cell(int j) { return Ident{"__tmp" + std::to_string(j), VarKind::Cell, ""}; }

inline Statement combine(const Statement& s, const Valuation& label, const AtomSet& as,
                         const std::vector<Ident>& inputs) {
    if (label.size != as.size()) throw Error("label size does not match atom set");
    std::vector<Statement> parts;
    // save_values: one tmp per update term, in atom-set order
    for (size_t j = 0; j < as.upds.size(); ++j)
        parts.push_back(Statement::assign(tmp_cell(static_cast<int>(j)), as.upds[j].source));
    // the statement's own assignments and havocs
    std::vector<Statement> s_asserts;
    for (const auto& b : flatten(s)) {
        if (b.kind() == Statement::Kind::Assert)
            s_asserts.push_back(b);
        else
            parts.push_back(b);
    }
    // new_inputs: havoc every input, in display order
    std::vector<Ident> ins = inputs;
    std::sort(ins.begin(), ins.end());
    for (const auto& i : ins) parts.push_back(Statement::havoc(Ident{i.name, VarKind::Cell, i.trace}));
    for (const auto& a : s_asserts) parts.push_back(a);
    // check_preds: full polarity conjunction over the predicate atoms
    Term preds = Term::constant(Value::boolean(true));
    bool first = true;
    for (size_t i = 0; i < as.preds.size(); ++i) {
        Term atom = label.test(static_cast<int>(i)) ? as.preds[i] : Term::negate(as.preds[i]);
        preds = first ? atom : Term::apply(TermOp::And, preds, atom);
        first = false;
    }
    parts.push_back(Statement::assertion(preds));
    // check_updates: c_j = tmp_j per the label's update polarities
    Term upds = Term::constant(Value::boolean(true));
    first = true;
    for (size_t j = 0; j < as.upds.size(); ++j) {
        int atom_index = static_cast<int>(as.preds.size() + j);
        Term cellv = Term::variable(Ident{as.upds[j].target.name, VarKind::Cell, as.upds[j].target.trace});
        Term tmpv = Term::variable(tmp_cell(static_cast<int>(j)));
        Term atom = Term::apply(label.test(atom_index) ? TermOp::Eq : TermOp::Ne, cellv, tmpv);
        upds = first ? atom : Term::apply(TermOp::And, upds, atom);
        first = false;
    }
    parts.push_back(Statement::assertion(upds));
    return Statement::seq_of(parts);
}

// ---------------------------------------------------------------------------
// Combined product P ⊗ A (Def across the full state spaces; acceptance is
// inherited from the formula automaton).

inline ProgramAutomaton combined_product(const ProgramAutomaton& p, const BuchiAutomaton<Valuation>& a,
                                         const AtomSet& as) {
    ProgramAutomaton out;
    out.system_mode = false;
    out.trace_names = p.trace_names;

    int na = a.num_states();
    auto sid = [&](int ps, int qs) { return ps * na + qs; };
    for (int ps = 0; ps < p.aut.num_states(); ++ps)
        for (int qs = 0; qs < na; ++qs) {
            std::string pn = p.aut.name(ps).empty() ? "q" + std::to_string(ps) : p.aut.name(ps);
            std::string qn = a.name(qs).empty() ? "f" + std::to_string(qs) : a.name(qs);
            out.aut.add_state(a.is_accepting(qs), pn + "|" + qn);
        }
    out.aut.set_initial(sid(p.aut.initial(), a.initial()));

    // C* = C ∪ I ∪ tmps; the product automaton has no inputs of its own
    out.cells = p.cells;
    for (const auto& i : p.inputs) out.cells.push_back(Ident{i.name, VarKind::Cell, i.trace});
    for (size_t j = 0; j < as.upds.size(); ++j) out.cells.push_back(tmp_cell(static_cast<int>(j)));
    std::sort(out.cells.begin(), out.cells.end());
    out.initial = p.initial;  // former inputs and tmps stay unpinned

    std::map<Transition<Statement>, TransitionProvenance> prov;
    const auto& pts = p.aut.transitions();
    for (size_t pi = 0; pi < pts.size(); ++pi) {
        const auto& pt = pts[pi];
        std::vector<Statement> tuple =
            p.has_provenance() ? p.provenance[pi].tuple : std::vector<Statement>{pt.label};
        for (const auto& at : a.transitions()) {
            Statement label = combine(pt.label, at.label, as, p.inputs);
            Transition<Statement> t{sid(pt.from, at.from), label, sid(pt.to, at.to)};
            out.aut.add_transition(t.from, t.label, t.to);
            prov.emplace(t, TransitionProvenance{tuple, at.label});
        }
    }
    out.provenance.clear();
    for (const auto& t : out.aut.transitions()) out.provenance.push_back(prov.at(t));
    return out;
}

// ---------------------------------------------------------------------------
// Universal projection: relabel every transition with the first m components
// of its statement tuple and deduplicate. States and acceptance are kept.

inline ProgramAutomaton universal_projection(const ProgramAutomaton& prod, const ProgramAutomaton& base,
                                             int m) {
    if (!prod.has_provenance()) throw MissingProvenance("projection needs transition provenance");
    if (m < 1 || static_cast<size_t>(m) > prod.trace_names.size())
        throw Error("projection arity out of range");
    ProgramAutomaton out;
    out.system_mode = false;
    out.trace_names.assign(prod.trace_names.begin(), prod.trace_names.begin() + m);

    out.aut = relabel_dedup(prod.aut, [&](int ti) {
        const auto& tuple = prod.provenance[static_cast<size_t>(ti)].tuple;
        if (static_cast<int>(tuple.size()) < m) throw MissingProvenance("statement tuple shorter than m");
        std::vector<Statement> first_m(tuple.begin(), tuple.begin() + m);
        return Statement::seq_of(first_m);
    });

    std::map<Ident, Value> init;
    for (int j = 0; j < m; ++j) {
        const std::string& tr = out.trace_names[static_cast<size_t>(j)];
        for (const auto& c : base.cells) out.cells.push_back(c.with_trace(tr));
        for (const auto& i : base.inputs) out.inputs.push_back(i.with_trace(tr));
        for (const auto& [id, v] : base.initial.entries()) init[id.with_trace(tr)] = v;
    }
    std::sort(out.cells.begin(), out.cells.end());
    std::sort(out.inputs.begin(), out.inputs.end());
    out.initial = Assignment(init);
    return out;
}

// Split a self-composition label back into its per-trace components.
inline std::vector<Statement> split_tuple_label(const Statement& label, int m) {
    std::vector<Statement> parts;
    Statement cur = label;
    for (int i = 0; i < m - 1; ++i) {
        if (cur.kind() != Statement::Kind::Seq) throw Error("label has fewer components than expected");
        parts.push_back(cur.first());
        cur = cur.second();
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace hytsl
