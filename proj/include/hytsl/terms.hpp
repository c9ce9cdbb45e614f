#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hytsl/bigint.hpp"
#include "hytsl/errors.hpp"
#include "hytsl/lexer.hpp"

namespace hytsl {

// ---------------------------------------------------------------------------
// Values: tagged integer-or-boolean scalars.

class Value {
public:
    Value() : v_(BigInt(0)) {}
    explicit Value(BigInt i) : v_(std::move(i)) {}
    explicit Value(long long i) : v_(BigInt(i)) {}
    static Value boolean(bool b) {
        Value v;
        v.v_ = b;
        return v;
    }
    static Value integer(BigInt i) { return Value(std::move(i)); }

    bool is_bool() const { return std::holds_alternative<bool>(v_); }
    bool is_int() const { return !is_bool(); }
    bool as_bool() const {
        if (!is_bool()) throw SortMismatch("expected boolean value, got " + to_string());
        return std::get<bool>(v_);
    }
    const BigInt& as_int() const {
        if (!is_int()) throw SortMismatch("expected integer value, got " + to_string());
        return std::get<BigInt>(v_);
    }

    std::string to_string() const {
        if (is_bool()) return as_bool() ? "true" : "false";
        return as_int().to_string();
    }

    friend bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }
    friend auto operator<=>(const Value& a, const Value& b) {
        if (a.is_bool() != b.is_bool()) return a.is_bool() <=> b.is_bool();
        if (a.is_bool()) return a.as_bool() <=> b.as_bool();
        return a.as_int() <=> b.as_int();
    }

private:
    std::variant<BigInt, bool> v_;
};

// ---------------------------------------------------------------------------
// Identifiers: a named cell or input, optionally tagged with a trace variable
// (hyper-terms use `x[pi]`). Cell and input namespaces are disjoint by
// validation, so identity is (name, trace); the kind records which
// declaration list the name came from. Inputs become ordinary cells of C*
// inside combined products, where this distinction matters.

enum class VarKind { Cell, Input };

struct Ident {
    std::string name;
    VarKind kind = VarKind::Cell;
    std::string trace;  // empty = not trace-indexed

    bool is_hyper() const { return !trace.empty(); }

    std::string to_string() const {
        if (trace.empty()) return name;
        return name + "[" + trace + "]";
    }

    Ident with_trace(const std::string& t) const { return Ident{name, kind, t}; }
    Ident without_trace() const { return Ident{name, kind, {}}; }

    friend bool operator==(const Ident& a, const Ident& b) {
        return a.name == b.name && a.trace == b.trace;
    }
    friend std::strong_ordering operator<=>(const Ident& a, const Ident& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        return a.trace <=> b.trace;
    }
};

// ---------------------------------------------------------------------------
// Function terms over the fixed LIA-plus-booleans theory.

enum class TermOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not };

inline int term_op_arity(TermOp op) { return op == TermOp::Not ? 1 : 2; }

enum class Sort { Int, Bool };

class Term {
public:
    enum class Kind { Const, Var, Apply };

    Term() = default;

    static Term constant(Value v) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Const;
        n->konst = std::move(v);
        return Term(std::move(n));
    }
    static Term constant(long long v) { return constant(Value(BigInt(v))); }
    static Term variable(Ident id) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Var;
        n->var = std::move(id);
        return Term(std::move(n));
    }
    static Term apply(TermOp op, std::vector<Term> args) {
        if (static_cast<int>(args.size()) != term_op_arity(op))
            throw SortMismatch("operator arity mismatch");
        auto n = std::make_shared<Node>();
        n->kind = Kind::Apply;
        n->op = op;
        n->args = std::move(args);
        return Term(std::move(n));
    }
    static Term apply(TermOp op, Term a, Term b) { return apply(op, std::vector<Term>{std::move(a), std::move(b)}); }
    static Term negate(Term a) { return apply(TermOp::Not, std::vector<Term>{std::move(a)}); }

    bool empty() const { return n_ == nullptr; }
    Kind kind() const { return n_->kind; }
    const Value& konst() const { return n_->konst; }
    const Ident& var() const { return n_->var; }
    TermOp op() const { return n_->op; }
    const std::vector<Term>& args() const { return n_->args; }

    std::string to_string() const { return print(*this, 0); }

    friend bool operator==(const Term& a, const Term& b) {
        if (a.n_ == b.n_) return true;
        if (!a.n_ || !b.n_) return false;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
            case Kind::Const: return a.konst() == b.konst();
            case Kind::Var: return a.var() == b.var();
            case Kind::Apply:
                if (a.op() != b.op() || a.args().size() != b.args().size()) return false;
                for (size_t i = 0; i < a.args().size(); ++i)
                    if (!(a.args()[i] == b.args()[i])) return false;
                return true;
        }
        return false;
    }

    friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

    static int compare(const Term& a, const Term& b) {
        if (a.n_ == b.n_) return 0;
        if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
        switch (a.kind()) {
            case Kind::Const: {
                auto c = a.konst() <=> b.konst();
                return c < 0 ? -1 : c > 0 ? 1 : 0;
            }
            case Kind::Var: {
                auto c = a.var() <=> b.var();
                return c < 0 ? -1 : c > 0 ? 1 : 0;
            }
            case Kind::Apply: {
                if (a.op() != b.op()) return a.op() < b.op() ? -1 : 1;
                if (a.args().size() != b.args().size()) return a.args().size() < b.args().size() ? -1 : 1;
                for (size_t i = 0; i < a.args().size(); ++i)
                    if (int c = compare(a.args()[i], b.args()[i])) return c;
                return 0;
            }
        }
        return 0;
    }

    template <class F>
    void for_each_var(F&& f) const {
        switch (kind()) {
            case Kind::Const: return;
            case Kind::Var: f(var()); return;
            case Kind::Apply:
                for (const auto& a : args()) a.for_each_var(f);
                return;
        }
    }

    // Structural rewrite of every variable; used for trace renaming.
    template <class F>
    Term map_vars(F&& f) const {
        switch (kind()) {
            case Kind::Const: return *this;
            case Kind::Var: return Term::variable(f(var()));
            case Kind::Apply: {
                std::vector<Term> as;
                as.reserve(args().size());
                for (const auto& a : args()) as.push_back(a.map_vars(f));
                return Term::apply(op(), std::move(as));
            }
        }
        return *this;
    }

private:
    struct Node {
        Kind kind = Kind::Const;
        Value konst;
        Ident var;
        TermOp op = TermOp::Add;
        std::vector<Term> args;
    };
    std::shared_ptr<const Node> n_;
    explicit Term(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    // Printing is injective on well-formed ASTs: parentheses are emitted
    // whenever a child binds no tighter than its parent.
    static int prec(TermOp op) {
        switch (op) {
            case TermOp::Not: return 6;
            case TermOp::Mul: return 5;
            case TermOp::Add:
            case TermOp::Sub: return 4;
            case TermOp::Eq:
            case TermOp::Ne:
            case TermOp::Lt:
            case TermOp::Le:
            case TermOp::Gt:
            case TermOp::Ge: return 3;
            case TermOp::And: return 2;
            case TermOp::Or: return 1;
        }
        return 0;
    }

    static const char* op_text(TermOp op) {
        switch (op) {
            case TermOp::Add: return "+";
            case TermOp::Sub: return "-";
            case TermOp::Mul: return "*";
            case TermOp::Eq: return "=";
            case TermOp::Ne: return "!=";
            case TermOp::Lt: return "<";
            case TermOp::Le: return "<=";
            case TermOp::Gt: return ">";
            case TermOp::Ge: return ">=";
            case TermOp::And: return "&&";
            case TermOp::Or: return "||";
            case TermOp::Not: return "!";
        }
        return "?";
    }

    static std::string print(const Term& t, int parent_prec) {
        switch (t.kind()) {
            case Kind::Const: return t.konst().to_string();
            case Kind::Var: return t.var().to_string();
            case Kind::Apply: {
                int p = prec(t.op());
                std::string s;
                if (t.op() == TermOp::Not) {
                    s = std::string("!") + print(t.args()[0], p);
                } else {
                    // left-assoc chains print without parens on the left child
                    s = print(t.args()[0], p - 1) + " " + op_text(t.op()) + " " + print(t.args()[1], p);
                }
                if (p <= parent_prec) s = "(" + s + ")";
                return s;
            }
        }
        return "?";
    }
};

inline std::string print_term(const Term& t) { return t.to_string(); }

// Sort inference with checking. Variables are integer-sorted by decision;
// booleans only arise from comparisons and connectives.
inline Sort sort_of(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Const:
            return t.konst().is_bool() ? Sort::Bool : Sort::Int;
        case Term::Kind::Var:
            return Sort::Int;
        case Term::Kind::Apply: {
            auto need = [&](const Term& x, Sort s) {
                if (sort_of(x) != s)
                    throw SortMismatch("ill-sorted operand in " + t.to_string());
            };
            switch (t.op()) {
                case TermOp::Add:
                case TermOp::Sub:
                case TermOp::Mul:
                    need(t.args()[0], Sort::Int);
                    need(t.args()[1], Sort::Int);
                    return Sort::Int;
                case TermOp::Lt:
                case TermOp::Le:
                case TermOp::Gt:
                case TermOp::Ge:
                    need(t.args()[0], Sort::Int);
                    need(t.args()[1], Sort::Int);
                    return Sort::Bool;
                case TermOp::Eq:
                case TermOp::Ne: {
                    if (sort_of(t.args()[0]) != sort_of(t.args()[1]))
                        throw SortMismatch("equality between different sorts in " + t.to_string());
                    return Sort::Bool;
                }
                case TermOp::And:
                case TermOp::Or:
                    need(t.args()[0], Sort::Bool);
                    need(t.args()[1], Sort::Bool);
                    return Sort::Bool;
                case TermOp::Not:
                    need(t.args()[0], Sort::Bool);
                    return Sort::Bool;
            }
        }
    }
    throw SortMismatch("unreachable sort case");
}

inline bool is_boolean_sorted(const Term& t) { return sort_of(t) == Sort::Bool; }

// A predicate term is a boolean-sorted function term.
using PredicateTerm = Term;

struct UpdateTerm {
    Ident target;  // always a cell
    Term source;

    std::string to_string() const { return "[" + target.to_string() + " <- " + source.to_string() + "]"; }

    friend bool operator==(const UpdateTerm& a, const UpdateTerm& b) {
        return a.target == b.target && a.source == b.source;
    }
    friend bool operator<(const UpdateTerm& a, const UpdateTerm& b) {
        if (auto c = a.target <=> b.target; c != 0) return c < 0;
        return b.source == a.source ? false : a.source < b.source;
    }
};

// ---------------------------------------------------------------------------
// Assignments and computations.

class Assignment {
public:
    Assignment() = default;
    explicit Assignment(std::map<Ident, Value> m) : m_(std::move(m)) {}

    const Value& at(const Ident& id) const {
        auto it = m_.find(id);
        if (it == m_.end()) throw UnboundVariable("unbound variable " + id.to_string());
        return it->second;
    }

    bool contains(const Ident& id) const { return m_.count(id) != 0; }

    Assignment with(Ident id, Value v) const {
        Assignment r = *this;
        r.m_[std::move(id)] = std::move(v);
        return r;
    }

    const std::map<Ident, Value>& entries() const { return m_; }
    size_t size() const { return m_.size(); }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (const auto& [id, v] : m_) {
            if (!first) s += ", ";
            first = false;
            s += id.to_string() + "=" + v.to_string();
        }
        return s + "}";
    }

    friend bool operator==(const Assignment& a, const Assignment& b) { return a.m_ == b.m_; }

private:
    std::map<Ident, Value> m_;
};

// Ultimately periodic computation: initial assignment ζ₋₁, a finite stem and
// a loop. An empty loop denotes a finite prefix (only used for witnesses).
struct Computation {
    Assignment initial;
    std::vector<Assignment> stem;
    std::vector<Assignment> loop;

    bool ultimately_periodic() const { return !loop.empty(); }
    size_t prefix_length() const { return stem.size() + loop.size(); }

    // ζ_t for t >= -1 (t = -1 is the initial assignment).
    const Assignment& at(long long t) const {
        if (t < 0) return initial;
        auto u = static_cast<size_t>(t);
        if (u < stem.size()) return stem[u];
        if (loop.empty()) {
            if (u < stem.size()) return stem[u];
            throw Error("finite computation indexed past its end");
        }
        return loop[(u - stem.size()) % loop.size()];
    }
};

// ---------------------------------------------------------------------------
// Evaluation (the function η) and update-term satisfaction.

inline Value evaluate(const Term& t, const Assignment& a) {
    switch (t.kind()) {
        case Term::Kind::Const:
            return t.konst();
        case Term::Kind::Var:
            return a.at(t.var());
        case Term::Kind::Apply: {
            switch (t.op()) {
                case TermOp::Add:
                    return Value(evaluate(t.args()[0], a).as_int() + evaluate(t.args()[1], a).as_int());
                case TermOp::Sub:
                    return Value(evaluate(t.args()[0], a).as_int() - evaluate(t.args()[1], a).as_int());
                case TermOp::Mul:
                    return Value(evaluate(t.args()[0], a).as_int() * evaluate(t.args()[1], a).as_int());
                case TermOp::Eq:
                    return Value::boolean(evaluate(t.args()[0], a) == evaluate(t.args()[1], a));
                case TermOp::Ne:
                    return Value::boolean(!(evaluate(t.args()[0], a) == evaluate(t.args()[1], a)));
                case TermOp::Lt:
                    return Value::boolean(evaluate(t.args()[0], a).as_int() < evaluate(t.args()[1], a).as_int());
                case TermOp::Le:
                    return Value::boolean(evaluate(t.args()[0], a).as_int() <= evaluate(t.args()[1], a).as_int());
                case TermOp::Gt:
                    return Value::boolean(evaluate(t.args()[0], a).as_int() > evaluate(t.args()[1], a).as_int());
                case TermOp::Ge:
                    return Value::boolean(evaluate(t.args()[0], a).as_int() >= evaluate(t.args()[1], a).as_int());
                case TermOp::And:
                    return Value::boolean(evaluate(t.args()[0], a).as_bool() && evaluate(t.args()[1], a).as_bool());
                case TermOp::Or:
                    return Value::boolean(evaluate(t.args()[0], a).as_bool() || evaluate(t.args()[1], a).as_bool());
                case TermOp::Not:
                    return Value::boolean(!evaluate(t.args()[0], a).as_bool());
            }
        }
    }
    throw Error("unreachable evaluate case");
}

// ⟦c ↞ τ⟧ holds between two consecutive assignments when η(τ, prev) = cur(c).
inline bool update_holds(const UpdateTerm& u, const Assignment& prev, const Assignment& cur) {
    return evaluate(u.source, prev) == cur.at(u.target);
}

// ---------------------------------------------------------------------------
// Concrete syntax.
//
//   term  := or
//   or    := and ( '||' and )*
//   and   := cmp ( '&&' cmp )*
//   cmp   := sum ( ('='|'!='|'<'|'<='|'>'|'>=') sum )?
//   sum   := prod ( ('+'|'-') prod )*
//   prod  := unary ( '*' unary )*
//   unary := '!' unary | '-' unary | atom
//   atom  := int | 'true' | 'false' | ident ('[' ident ']')? | '(' term ')'
//
// Identifier kinds (cell vs input) are not part of the syntax; parsers take a
// resolver so the enclosing context (declared cells/inputs) decides.

using IdentResolver = std::function<Ident(const std::string& name, const std::string& trace)>;

inline IdentResolver default_resolver() {
    return [](const std::string& name, const std::string& trace) {
        return Ident{name, VarKind::Cell, trace};
    };
}

namespace detail {

class TermParser {
public:
    TermParser(Lexer& lx, IdentResolver resolve) : lx_(lx), resolve_(std::move(resolve)) {}

    Term parse_or() {
        Term t = parse_and();
        while (lx_.accept(Tok::OrOr)) t = Term::apply(TermOp::Or, t, parse_and());
        return t;
    }

    Term parse_and() {
        Term t = parse_cmp();
        while (lx_.accept(Tok::AndAnd)) t = Term::apply(TermOp::And, t, parse_cmp());
        return t;
    }

    Term parse_cmp() {
        Term t = parse_sum();
        TermOp op;
        switch (lx_.peek().kind) {
            case Tok::Eq: op = TermOp::Eq; break;
            case Tok::Ne: op = TermOp::Ne; break;
            case Tok::Lt: op = TermOp::Lt; break;
            case Tok::Le: op = TermOp::Le; break;
            case Tok::Gt: op = TermOp::Gt; break;
            case Tok::Ge: op = TermOp::Ge; break;
            default: return t;
        }
        lx_.next();
        return Term::apply(op, t, parse_sum());
    }

    Term parse_sum() {
        Term t = parse_prod();
        for (;;) {
            if (lx_.accept(Tok::Plus))
                t = Term::apply(TermOp::Add, t, parse_prod());
            else if (lx_.accept(Tok::Minus))
                t = Term::apply(TermOp::Sub, t, parse_prod());
            else
                return t;
        }
    }

    Term parse_prod() {
        Term t = parse_unary();
        while (lx_.accept(Tok::Star)) t = Term::apply(TermOp::Mul, t, parse_unary());
        return t;
    }

    Term parse_unary() {
        if (lx_.accept(Tok::Bang)) return Term::negate(parse_unary());
        if (lx_.accept(Tok::Minus)) {
            if (lx_.peek().kind == Tok::Int)  // negative literal, not 0 - x
                return Term::constant(Value(-BigInt::from_string(lx_.next().text)));
            return Term::apply(TermOp::Sub, Term::constant(0), parse_unary());
        }
        return parse_atom();
    }

    Term parse_atom() {
        const Token& t = lx_.peek();
        switch (t.kind) {
            case Tok::Int: {
                Term r = Term::constant(Value(BigInt::from_string(t.text)));
                lx_.next();
                return r;
            }
            case Tok::Ident: {
                if (t.text == "true") {
                    lx_.next();
                    return Term::constant(Value::boolean(true));
                }
                if (t.text == "false") {
                    lx_.next();
                    return Term::constant(Value::boolean(false));
                }
                std::string name = lx_.next().text;
                std::string trace;
                if (lx_.accept(Tok::LBracket)) {
                    trace = lx_.expect(Tok::Ident, "trace variable").text;
                    lx_.expect(Tok::RBracket, "']'");
                }
                return Term::variable(resolve_(name, trace));
            }
            case Tok::LParen: {
                lx_.next();
                Term r = parse_or();
                lx_.expect(Tok::RParen, "')'");
                return r;
            }
            default:
                lx_.fail("expected a term");
        }
    }

private:
    Lexer& lx_;
    IdentResolver resolve_;
};

}  // namespace detail

inline Term parse_term(std::string_view text, IdentResolver resolve = default_resolver()) {
    Lexer lx(text);
    detail::TermParser p(lx, std::move(resolve));
    Term t = p.parse_or();
    if (!lx.at_end()) lx.fail("trailing input after term");
    return t;
}

}  // namespace hytsl
