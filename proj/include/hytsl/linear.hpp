#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hytsl/bigint.hpp"
#include "hytsl/terms.hpp"

namespace hytsl {

// Quantifier-free linear integer arithmetic layer shared by the solvers and
// the feasibility encodings. Variables are indices into a VarTable.

using VarId = int;

class VarTable {
public:
    VarId fresh(std::string name) {
        names_.push_back(std::move(name));
        return static_cast<VarId>(names_.size()) - 1;
    }
    const std::string& name(VarId v) const { return names_.at(static_cast<size_t>(v)); }
    int size() const { return static_cast<int>(names_.size()); }

private:
    std::vector<std::string> names_;
};

struct LinExpr {
    std::map<VarId, BigInt> coeff;  // zero coefficients are never stored
    BigInt constant;

    static LinExpr of_const(BigInt c) { return LinExpr{{}, std::move(c)}; }
    static LinExpr of_var(VarId v) { return LinExpr{{{v, BigInt(1)}}, BigInt(0)}; }

    bool is_const() const { return coeff.empty(); }

    void add_coeff(VarId v, const BigInt& c) {
        auto it = coeff.find(v);
        if (it == coeff.end()) {
            if (!c.is_zero()) coeff.emplace(v, c);
            return;
        }
        it->second += c;
        if (it->second.is_zero()) coeff.erase(it);
    }

    friend LinExpr operator+(const LinExpr& a, const LinExpr& b) {
        LinExpr r = a;
        r.constant += b.constant;
        for (const auto& [v, c] : b.coeff) r.add_coeff(v, c);
        return r;
    }
    friend LinExpr operator-(const LinExpr& a, const LinExpr& b) { return a + b.scaled(BigInt(-1)); }

    LinExpr scaled(const BigInt& f) const {
        LinExpr r;
        if (f.is_zero()) return r;
        r.constant = constant * f;
        for (const auto& [v, c] : coeff) r.coeff.emplace(v, c * f);
        return r;
    }

    // expr[x := e]
    LinExpr substituted(VarId x, const LinExpr& e) const {
        auto it = coeff.find(x);
        if (it == coeff.end()) return *this;
        BigInt a = it->second;
        LinExpr r = *this;
        r.coeff.erase(x);
        return r + e.scaled(a);
    }

    BigInt eval(const std::map<VarId, BigInt>& values) const {
        BigInt r = constant;
        for (const auto& [v, c] : coeff) {
            auto it = values.find(v);
            r += c * (it == values.end() ? BigInt(0) : it->second);
        }
        return r;
    }

    std::string to_string(const VarTable& vars) const {
        std::string s;
        for (const auto& [v, c] : coeff) {
            if (!s.empty()) s += " + ";
            s += c.to_string() + "*" + vars.name(v);
        }
        if (s.empty()) return constant.to_string();
        if (!constant.is_zero()) s += " + " + constant.to_string();
        return s;
    }
};

enum class LinRel { Ge0, Eq0 };  // expr >= 0, expr == 0

struct LinAtom {
    LinExpr expr;
    LinRel rel = LinRel::Ge0;
};

// Boolean combinations of linear atoms, immutable tree with value semantics.
class LinFormula {
public:
    enum class Kind { True, False, Atom, Not, And, Or };

    LinFormula() : LinFormula(truth(true)) {}

    static LinFormula truth(bool b) {
        auto n = std::make_shared<Node>();
        n->kind = b ? Kind::True : Kind::False;
        return LinFormula(std::move(n));
    }
    static LinFormula atom(LinAtom a) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Atom;
        n->atom = std::move(a);
        return LinFormula(std::move(n));
    }
    static LinFormula ge0(LinExpr e) { return atom(LinAtom{std::move(e), LinRel::Ge0}); }
    static LinFormula eq0(LinExpr e) { return atom(LinAtom{std::move(e), LinRel::Eq0}); }
    // a >= b, a > b, a = b as convenience builders
    static LinFormula ge(const LinExpr& a, const LinExpr& b) { return ge0(a - b); }
    static LinFormula gt(const LinExpr& a, const LinExpr& b) { return ge0(a - b - LinExpr::of_const(BigInt(1))); }
    static LinFormula eq(const LinExpr& a, const LinExpr& b) { return eq0(a - b); }

    static LinFormula negate(LinFormula f) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Not;
        n->children = {std::move(f)};
        return LinFormula(std::move(n));
    }
    static LinFormula conj(std::vector<LinFormula> fs) { return nary(Kind::And, std::move(fs), true); }
    static LinFormula disj(std::vector<LinFormula> fs) { return nary(Kind::Or, std::move(fs), false); }
    static LinFormula conj(LinFormula a, LinFormula b) { return conj(std::vector<LinFormula>{std::move(a), std::move(b)}); }
    static LinFormula disj(LinFormula a, LinFormula b) { return disj(std::vector<LinFormula>{std::move(a), std::move(b)}); }

    Kind kind() const { return n_->kind; }
    const LinAtom& atom_value() const { return n_->atom; }
    const std::vector<LinFormula>& children() const { return n_->children; }

    template <class F>
    void for_each_var(F&& f) const {
        switch (kind()) {
            case Kind::True:
            case Kind::False:
                return;
            case Kind::Atom:
                for (const auto& [v, c] : atom_value().expr.coeff) f(v);
                return;
            default:
                for (const auto& ch : children()) ch.for_each_var(f);
        }
    }

    std::string to_string(const VarTable& vars) const {
        switch (kind()) {
            case Kind::True: return "true";
            case Kind::False: return "false";
            case Kind::Atom:
                return "(" + atom_value().expr.to_string(vars) +
                       (atom_value().rel == LinRel::Ge0 ? " >= 0)" : " = 0)");
            case Kind::Not: return "!" + children()[0].to_string(vars);
            case Kind::And:
            case Kind::Or: {
                std::string s = "(";
                for (size_t i = 0; i < children().size(); ++i) {
                    if (i) s += kind() == Kind::And ? " && " : " || ";
                    s += children()[i].to_string(vars);
                }
                return s + ")";
            }
        }
        return "?";
    }

private:
    struct Node {
        Kind kind = Kind::True;
        LinAtom atom;
        std::vector<LinFormula> children;
    };
    std::shared_ptr<const Node> n_;
    explicit LinFormula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    static LinFormula nary(Kind k, std::vector<LinFormula> fs, bool and_like) {
        // fold out neutral elements, short-circuit on absorbing ones
        std::vector<LinFormula> kept;
        for (auto& f : fs) {
            if (f.kind() == (and_like ? Kind::True : Kind::False)) continue;
            if (f.kind() == (and_like ? Kind::False : Kind::True)) return truth(!and_like);
            kept.push_back(std::move(f));
        }
        if (kept.empty()) return truth(and_like);
        if (kept.size() == 1) return kept[0];
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->children = std::move(kept);
        return LinFormula(std::move(n));
    }
};

// ---------------------------------------------------------------------------
// Term -> linear form. The theory restricts multiplication to constant*term.

using VarLookup = std::function<VarId(const Ident&)>;

inline LinExpr linearize_int(const Term& t, const VarLookup& lookup);

inline LinFormula linearize_bool(const Term& t, const VarLookup& lookup) {
    if (t.kind() == Term::Kind::Const) return LinFormula::truth(t.konst().as_bool());
    if (t.kind() == Term::Kind::Var) throw SortMismatch("variable in boolean position: " + t.to_string());
    switch (t.op()) {
        case TermOp::And:
            return LinFormula::conj(linearize_bool(t.args()[0], lookup), linearize_bool(t.args()[1], lookup));
        case TermOp::Or:
            return LinFormula::disj(linearize_bool(t.args()[0], lookup), linearize_bool(t.args()[1], lookup));
        case TermOp::Not:
            return LinFormula::negate(linearize_bool(t.args()[0], lookup));
        case TermOp::Eq:
        case TermOp::Ne: {
            if (sort_of(t.args()[0]) == Sort::Bool) {
                LinFormula a = linearize_bool(t.args()[0], lookup);
                LinFormula b = linearize_bool(t.args()[1], lookup);
                LinFormula iff = LinFormula::disj(LinFormula::conj(a, b),
                                                  LinFormula::conj(LinFormula::negate(a), LinFormula::negate(b)));
                return t.op() == TermOp::Eq ? iff : LinFormula::negate(iff);
            }
            LinExpr d = linearize_int(t.args()[0], lookup) - linearize_int(t.args()[1], lookup);
            LinFormula e = LinFormula::eq0(d);
            return t.op() == TermOp::Eq ? e : LinFormula::negate(e);
        }
        case TermOp::Lt:
            return LinFormula::gt(linearize_int(t.args()[1], lookup), linearize_int(t.args()[0], lookup));
        case TermOp::Le:
            return LinFormula::ge(linearize_int(t.args()[1], lookup), linearize_int(t.args()[0], lookup));
        case TermOp::Gt:
            return LinFormula::gt(linearize_int(t.args()[0], lookup), linearize_int(t.args()[1], lookup));
        case TermOp::Ge:
            return LinFormula::ge(linearize_int(t.args()[0], lookup), linearize_int(t.args()[1], lookup));
        default:
            throw SortMismatch("integer operator in boolean position: " + t.to_string());
    }
}

inline LinExpr linearize_int(const Term& t, const VarLookup& lookup) {
    switch (t.kind()) {
        case Term::Kind::Const:
            return LinExpr::of_const(t.konst().as_int());
        case Term::Kind::Var:
            return LinExpr::of_var(lookup(t.var()));
        case Term::Kind::Apply:
            switch (t.op()) {
                case TermOp::Add:
                    return linearize_int(t.args()[0], lookup) + linearize_int(t.args()[1], lookup);
                case TermOp::Sub:
                    return linearize_int(t.args()[0], lookup) - linearize_int(t.args()[1], lookup);
                case TermOp::Mul: {
                    LinExpr a = linearize_int(t.args()[0], lookup);
                    LinExpr b = linearize_int(t.args()[1], lookup);
                    if (a.is_const()) return b.scaled(a.constant);
                    if (b.is_const()) return a.scaled(b.constant);
                    throw ValidationError("nonlinear product outside LIA: " + t.to_string());
                }
                default:
                    throw SortMismatch("boolean operator in integer position: " + t.to_string());
            }
    }
    throw SortMismatch("unreachable linearize case");
}

}  // namespace hytsl
