#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hytsl/terms.hpp"
#include "hytsl/valuation.hpp"

namespace hytsl {

// ---------------------------------------------------------------------------
// Temporal core AST. Derived operators are desugared at parse time:
//   a || b  =  !(!a && !b)     F a  =  true U a     G a  =  !F !a
// (at the formula level; inside a predicate atom, || stays part of the term).

class TemporalFormula {
public:
    enum class Kind { Pred, Upd, Not, And, Next, Until };

    static TemporalFormula pred(Term t) {
        if (!is_boolean_sorted(t)) throw SortMismatch("predicate atom is not boolean-sorted: " + t.to_string());
        auto n = std::make_shared<Node>();
        n->kind = Kind::Pred;
        n->term = std::move(t);
        return TemporalFormula(std::move(n));
    }
    static TemporalFormula upd(UpdateTerm u) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Upd;
        n->update = std::move(u);
        return TemporalFormula(std::move(n));
    }
    static TemporalFormula negation(TemporalFormula f) { return unary(Kind::Not, std::move(f)); }
    static TemporalFormula conj(TemporalFormula a, TemporalFormula b) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::And;
        n->children = {std::move(a), std::move(b)};
        return TemporalFormula(std::move(n));
    }
    static TemporalFormula next(TemporalFormula f) { return unary(Kind::Next, std::move(f)); }
    static TemporalFormula until(TemporalFormula a, TemporalFormula b) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Until;
        n->children = {std::move(a), std::move(b)};
        return TemporalFormula(std::move(n));
    }
    static TemporalFormula truth() { return pred(Term::constant(Value::boolean(true))); }
    static TemporalFormula eventually(TemporalFormula f) { return until(truth(), std::move(f)); }
    static TemporalFormula globally(TemporalFormula f) {
        return negation(eventually(negation(std::move(f))));
    }

    Kind kind() const { return n_->kind; }
    const Term& term() const { return n_->term; }
    const UpdateTerm& update() const { return n_->update; }
    const TemporalFormula& child(size_t i = 0) const { return n_->children[i]; }
    const void* id() const { return n_.get(); }

    std::string to_string() const {
        // reconstruct the derived operators for readability
        if (kind() == Kind::Until && is_true_const(child(0))) {
            if (child(1).kind() == Kind::Not) return "F !(" + child(1).child().to_string() + ")";
            return "F (" + child(1).to_string() + ")";
        }
        if (kind() == Kind::Not && child().kind() == Kind::Until && is_true_const(child().child(0)) &&
            child().child(1).kind() == Kind::Not)
            return "G (" + child().child(1).child().to_string() + ")";
        switch (kind()) {
            case Kind::Pred: return term().to_string();
            case Kind::Upd: return update().to_string();
            case Kind::Not: return "!(" + child().to_string() + ")";
            case Kind::And: return "(" + child(0).to_string() + " && " + child(1).to_string() + ")";
            case Kind::Next: return "X (" + child().to_string() + ")";
            case Kind::Until: return "(" + child(0).to_string() + " U " + child(1).to_string() + ")";
        }
        return "?";
    }

    template <class F>
    void for_each_atom(F&& f) const {
        switch (kind()) {
            case Kind::Pred:
            case Kind::Upd:
                f(*this);
                return;
            default:
                for (const auto& c : n_->children) c.for_each_atom(f);
        }
    }

    TemporalFormula map_terms(const std::function<Term(const Term&)>& tf,
                              const std::function<Ident(const Ident&)>& vf) const {
        switch (kind()) {
            case Kind::Pred: return pred(tf(term()));
            case Kind::Upd: return upd(UpdateTerm{vf(update().target), tf(update().source)});
            case Kind::Not: return negation(child().map_terms(tf, vf));
            case Kind::And: return conj(child(0).map_terms(tf, vf), child(1).map_terms(tf, vf));
            case Kind::Next: return next(child().map_terms(tf, vf));
            case Kind::Until: return until(child(0).map_terms(tf, vf), child(1).map_terms(tf, vf));
        }
        throw Error("unreachable");
    }

private:
    struct Node {
        Kind kind = Kind::Pred;
        Term term;
        UpdateTerm update;
        std::vector<TemporalFormula> children;
    };
    std::shared_ptr<const Node> n_;
    explicit TemporalFormula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    static bool is_true_const(const TemporalFormula& f) {
        return f.kind() == Kind::Pred && f.term().kind() == Term::Kind::Const &&
               f.term().konst().is_bool() && f.term().konst().as_bool();
    }

    static TemporalFormula unary(Kind k, TemporalFormula f) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->children = {std::move(f)};
        return TemporalFormula(std::move(n));
    }
};

enum class Quantifier { Forall, Exists };

struct QuantifiedTrace {
    Quantifier quant;
    std::string name;
};

struct Formula {
    std::vector<QuantifiedTrace> prefix;
    TemporalFormula core = TemporalFormula::truth();

    bool is_tsl() const { return prefix.empty(); }

    std::string to_string() const {
        std::string s;
        for (const auto& q : prefix)
            s += (q.quant == Quantifier::Forall ? "forall " : "exists ") + q.name + ". ";
        return s + core.to_string();
    }
};

// ---------------------------------------------------------------------------
// Atom sets: the syntactic predicate/update occurrences of one formula,
// deduplicated structurally and ordered by printed form. The skeleton's
// abstract proposition i refers to preds[i], or upds[i - preds.size()].

struct AtomSet {
    std::vector<Term> preds;
    std::vector<UpdateTerm> upds;

    int size() const { return static_cast<int>(preds.size() + upds.size()); }

    std::optional<int> pred_index(const Term& t) const {
        for (size_t i = 0; i < preds.size(); ++i)
            if (preds[i] == t) return static_cast<int>(i);
        return std::nullopt;
    }
    std::optional<int> upd_index(const UpdateTerm& u) const {
        for (size_t i = 0; i < upds.size(); ++i)
            if (upds[i] == u) return static_cast<int>(preds.size() + i);
        return std::nullopt;
    }

    bool is_upd_atom(int i) const { return i >= static_cast<int>(preds.size()); }
    std::string atom_text(int i) const {
        if (is_upd_atom(i)) return upds[static_cast<size_t>(i) - preds.size()].to_string();
        return preds[static_cast<size_t>(i)].to_string();
    }
};

namespace detail {
inline bool is_const_bool(const Term& t) { return t.kind() == Term::Kind::Const && t.konst().is_bool(); }
}

inline AtomSet atoms(const TemporalFormula& core) {
    std::map<std::string, Term> preds;
    std::map<std::string, UpdateTerm> upds;
    core.for_each_atom([&](const TemporalFormula& a) {
        if (a.kind() == TemporalFormula::Kind::Pred) {
            if (detail::is_const_bool(a.term())) return;  // true/false are not atoms
            preds.emplace(a.term().to_string(), a.term());
        } else {
            upds.emplace(a.update().to_string(), a.update());
        }
    });
    AtomSet r;
    for (auto& [k, v] : preds) r.preds.push_back(v);
    for (auto& [k, v] : upds) r.upds.push_back(v);
    return r;
}

inline AtomSet atoms(const Formula& f) { return atoms(f.core); }

// ---------------------------------------------------------------------------
// LTL over abstract atoms (the skeleton target and the ltl2buchi input).

class LtlFormula {
public:
    enum class Kind { True, False, Atom, Not, And, Next, Until };

    static LtlFormula truth(bool b) { return leaf(b ? Kind::True : Kind::False); }
    static LtlFormula atom(int i) {
        auto f = leaf(Kind::Atom);
        const_cast<Node*>(f.n_.get())->atom = i;
        return f;
    }
    static LtlFormula negation(LtlFormula a) { return node(Kind::Not, {std::move(a)}); }
    static LtlFormula conj(LtlFormula a, LtlFormula b) { return node(Kind::And, {std::move(a), std::move(b)}); }
    static LtlFormula next(LtlFormula a) { return node(Kind::Next, {std::move(a)}); }
    static LtlFormula until(LtlFormula a, LtlFormula b) { return node(Kind::Until, {std::move(a), std::move(b)}); }
    static LtlFormula disj(LtlFormula a, LtlFormula b) {
        return negation(conj(negation(std::move(a)), negation(std::move(b))));
    }
    static LtlFormula eventually(LtlFormula a) { return until(truth(true), std::move(a)); }
    static LtlFormula globally(LtlFormula a) { return negation(eventually(negation(std::move(a)))); }

    Kind kind() const { return n_->kind; }
    int atom_index() const { return n_->atom; }
    const LtlFormula& child(size_t i = 0) const { return n_->children[i]; }
    const void* id() const { return n_.get(); }

    int size() const {
        int s = 1;
        for (const auto& c : n_->children) s += c.size();
        return s;
    }

    std::string to_string() const {
        switch (kind()) {
            case Kind::True: return "true";
            case Kind::False: return "false";
            case Kind::Atom: return "a" + std::to_string(atom_index());
            case Kind::Not: return "!(" + child().to_string() + ")";
            case Kind::And: return "(" + child(0).to_string() + " && " + child(1).to_string() + ")";
            case Kind::Next: return "X (" + child().to_string() + ")";
            case Kind::Until: return "(" + child(0).to_string() + " U " + child(1).to_string() + ")";
        }
        return "?";
    }

private:
    struct Node {
        Kind kind = Kind::True;
        int atom = -1;
        std::vector<LtlFormula> children;
    };
    std::shared_ptr<const Node> n_;
    explicit LtlFormula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

    static LtlFormula leaf(Kind k) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        return LtlFormula(std::move(n));
    }
    static LtlFormula node(Kind k, std::vector<LtlFormula> ch) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->children = std::move(ch);
        return LtlFormula(std::move(n));
    }
};

struct Skeleton {
    LtlFormula ltl = LtlFormula::truth(true);
    AtomSet atom_set;  // bijection: abstract proposition i <-> atom_set entry i
};

// Replace every atom occurrence by its abstract proposition. Constant
// true/false predicates fold into LTL constants.
inline LtlFormula skeleton_of(const TemporalFormula& f, const AtomSet& as) {
    using K = TemporalFormula::Kind;
    switch (f.kind()) {
        case K::Pred: {
            if (detail::is_const_bool(f.term())) return LtlFormula::truth(f.term().konst().as_bool());
            auto i = as.pred_index(f.term());
            if (!i) throw Error("atom not in set: " + f.term().to_string());
            return LtlFormula::atom(*i);
        }
        case K::Upd: {
            auto i = as.upd_index(f.update());
            if (!i) throw Error("atom not in set: " + f.update().to_string());
            return LtlFormula::atom(*i);
        }
        case K::Not: return LtlFormula::negation(skeleton_of(f.child(), as));
        case K::And: return LtlFormula::conj(skeleton_of(f.child(0), as), skeleton_of(f.child(1), as));
        case K::Next: return LtlFormula::next(skeleton_of(f.child(), as));
        case K::Until: return LtlFormula::until(skeleton_of(f.child(0), as), skeleton_of(f.child(1), as));
    }
    throw Error("unreachable");
}

inline Skeleton ltl_skeleton(const Formula& f) {
    Skeleton s;
    s.atom_set = atoms(f);
    s.ltl = skeleton_of(f.core, s.atom_set);
    return s;
}

// ---------------------------------------------------------------------------
// Ultimately periodic words of valuations.

struct ValuationWord {
    std::vector<Valuation> stem;
    std::vector<Valuation> loop;

    const Valuation& at(size_t t) const {
        if (t < stem.size()) return stem[t];
        return loop[(t - stem.size()) % loop.size()];
    }
};

// ---------------------------------------------------------------------------
// Semantic LTL evaluation on ultimately periodic words. Exact: positions are
// canonicalized into [0, stem+loop) and Until walks the forward orbit.

class LtlEvaluator {
public:
    LtlEvaluator(const LtlFormula& f, const ValuationWord& w) : f_(f), w_(w) {
        if (w.loop.empty()) throw Error("LTL evaluation needs an ultimately periodic word");
        positions_ = w.stem.size() + w.loop.size();
    }

    bool at(size_t t) const { return eval(f_, canonical(t)); }

private:
    const LtlFormula& f_;
    const ValuationWord& w_;
    size_t positions_;
    mutable std::map<std::pair<const void*, size_t>, bool> memo_;

    size_t canonical(size_t t) const {
        if (t < positions_) return t;
        return w_.stem.size() + (t - w_.stem.size()) % w_.loop.size();
    }
    size_t succ(size_t p) const { return p + 1 < positions_ ? p + 1 : w_.stem.size(); }

    bool eval(const LtlFormula& f, size_t p) const {
        using K = LtlFormula::Kind;
        switch (f.kind()) {
            case K::True: return true;
            case K::False: return false;
            case K::Atom: return w_.at(p).test(f.atom_index());
            default: break;
        }
        auto key = std::make_pair(f.id(), p);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        bool r = false;
        switch (f.kind()) {
            case K::Not: r = !eval(f.child(), p); break;
            case K::And: r = eval(f.child(0), p) && eval(f.child(1), p); break;
            case K::Next: r = eval(f.child(), succ(p)); break;
            case K::Until: {
                size_t q = p;
                for (size_t steps = 0; steps <= positions_; ++steps) {
                    if (eval(f.child(1), q)) {
                        r = true;
                        break;
                    }
                    if (!eval(f.child(0), q)) break;
                    q = succ(q);
                }
                break;
            }
            default: break;
        }
        memo_.emplace(key, r);
        return r;
    }
};

inline bool eval_ltl(const LtlFormula& f, const ValuationWord& w, size_t t) {
    return LtlEvaluator(f, w).at(t);
}

// ---------------------------------------------------------------------------
// Direct TSL semantics on ultimately periodic computations. Update atoms at
// position t read the pair (ζ_{t-1}, ζ_t), so the atom-level period starts
// one step after the computation's: positions run over [0, stem+loop].

class TslEvaluator {
public:
    TslEvaluator(const TemporalFormula& f, const Computation& z) : f_(f), z_(z) {
        if (!z.ultimately_periodic()) throw Error("TSL evaluation needs an ultimately periodic computation");
        positions_ = z.stem.size() + z.loop.size() + 1;
    }

    bool at(size_t t) const { return eval(f_, canonical(t)); }

private:
    const TemporalFormula& f_;
    const Computation& z_;
    size_t positions_;  // canonical positions 0 .. stem+loop
    mutable std::map<std::pair<const void*, size_t>, bool> memo_;

    size_t canonical(size_t t) const {
        if (t < positions_) return t;
        size_t loop_start = z_.stem.size() + 1;
        return loop_start + (t - loop_start) % z_.loop.size();
    }
    size_t succ(size_t p) const { return p + 1 < positions_ ? p + 1 : z_.stem.size() + 1; }

    bool eval(const TemporalFormula& f, size_t p) const {
        using K = TemporalFormula::Kind;
        auto key = std::make_pair(f.id(), p);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        bool r = false;
        switch (f.kind()) {
            case K::Pred:
                r = evaluate(f.term(), z_.at(static_cast<long long>(p))).as_bool();
                break;
            case K::Upd:
                r = update_holds(f.update(), z_.at(static_cast<long long>(p) - 1),
                                 z_.at(static_cast<long long>(p)));
                break;
            case K::Not: r = !eval(f.child(), p); break;
            case K::And: r = eval(f.child(0), p) && eval(f.child(1), p); break;
            case K::Next: r = eval(f.child(), succ(p)); break;
            case K::Until: {
                size_t q = p;
                for (size_t steps = 0; steps <= positions_; ++steps) {
                    if (eval(f.child(1), q)) {
                        r = true;
                        break;
                    }
                    if (!eval(f.child(0), q)) break;
                    q = succ(q);
                }
                break;
            }
        }
        memo_.emplace(key, r);
        return r;
    }
};

inline bool eval_tsl(const TemporalFormula& f, const Computation& z, size_t t) {
    return TslEvaluator(f, z).at(t);
}

// Seq: the word of atom valuations induced by a computation; position t holds
// exactly the atoms satisfied at t (updates judged against t-1, with the
// initial assignment at t = 0).
inline ValuationWord seq_of(const Computation& z, const AtomSet& as) {
    if (!z.ultimately_periodic()) throw Error("seq_of needs an ultimately periodic computation");
    auto val_at = [&](size_t t) {
        Valuation v = Valuation::empty(as.size());
        int i = 0;
        for (const auto& p : as.preds) {
            if (evaluate(p, z.at(static_cast<long long>(t))).as_bool()) v = v.with(i, true);
            ++i;
        }
        for (const auto& u : as.upds) {
            if (update_holds(u, z.at(static_cast<long long>(t) - 1), z.at(static_cast<long long>(t))))
                v = v.with(i, true);
            ++i;
        }
        return v;
    };
    ValuationWord w;
    for (size_t t = 0; t <= z.stem.size(); ++t) w.stem.push_back(val_at(t));
    for (size_t t = z.stem.size() + 1; t <= z.stem.size() + z.loop.size(); ++t) w.loop.push_back(val_at(t));
    return w;
}

// ---------------------------------------------------------------------------
// HyperTSL semantics at desk scale: expand the prenex quantifiers over a
// finite set of computations, align the chosen computations to a common
// period, and evaluate the core over trace-tagged identifiers.

namespace detail {

inline size_t lcm_size(size_t a, size_t b) {
    return a / std::gcd(a, b) * b;
}

inline Computation joint_computation(const std::vector<std::pair<std::string, const Computation*>>& chosen) {
    size_t stem = 0, loop = 1;
    for (const auto& [name, z] : chosen) {
        if (!z->ultimately_periodic()) throw Error("hyper evaluation needs ultimately periodic computations");
        stem = std::max(stem, z->stem.size());
        loop = detail::lcm_size(loop, z->loop.size());
        if (loop > 4096) throw Error("joint loop too large");
    }
    auto merged_at = [&](long long t) {
        std::map<Ident, Value> m;
        for (const auto& [name, z] : chosen)
            for (const auto& [id, v] : z->at(t).entries()) m[id.with_trace(name)] = v;
        return Assignment(m);
    };
    Computation j;
    j.initial = merged_at(-1);
    for (size_t t = 0; t < stem; ++t) j.stem.push_back(merged_at(static_cast<long long>(t)));
    for (size_t t = stem; t < stem + loop; ++t) j.loop.push_back(merged_at(static_cast<long long>(t)));
    return j;
}

inline bool eval_hyper_rec(const Formula& f, const std::vector<Computation>& zs, size_t qi,
                           std::vector<std::pair<std::string, const Computation*>>& chosen) {
    if (qi == f.prefix.size()) {
        Computation joint = joint_computation(chosen);
        return eval_tsl(f.core, joint, 0);
    }
    const auto& q = f.prefix[qi];
    for (const auto& z : zs) {
        chosen.emplace_back(q.name, &z);
        bool r = eval_hyper_rec(f, zs, qi + 1, chosen);
        chosen.pop_back();
        if (q.quant == Quantifier::Forall && !r) return false;
        if (q.quant == Quantifier::Exists && r) return true;
    }
    return q.quant == Quantifier::Forall;
}

}  // namespace detail

inline bool eval_hypertsl(const Formula& f, const std::vector<Computation>& zs) {
    if (f.prefix.empty()) {
        if (zs.size() != 1) throw Error("a TSL formula is evaluated against a single computation");
        return eval_tsl(f.core, zs[0], 0);
    }
    std::vector<std::pair<std::string, const Computation*>> chosen;
    return detail::eval_hyper_rec(f, zs, 0, chosen);
}

// ---------------------------------------------------------------------------
// Parsing.
//
// The parser builds a raw tree whose leaves are comparison-level terms or
// update terms, then collapses every maximal boolean combination of pure
// terms into a single predicate atom. That keeps the user's predicate
// boundaries: `G (i[pi2] = 0 && c[pi] = c[pi2])` is one atom, while in
// `G (n > 0 && [n <- n+7])` the conjunction stays at the formula level.

namespace detail {

struct FormulaParser {
    Lexer& lx;
    IdentResolver resolve;

    // raw nodes: either a collapsed Term or a TemporalFormula in the making
    struct Raw {
        bool termable;
        Term term;            // valid when termable
        TemporalFormula tf;   // valid when !termable
        Raw(Term t) : termable(true), term(std::move(t)), tf(TemporalFormula::truth()) {}
        Raw(TemporalFormula f) : termable(false), tf(std::move(f)) {}
    };

    TemporalFormula lower(const Raw& r) {
        return r.termable ? TemporalFormula::pred(r.term) : r.tf;
    }

    Raw parse_or() {
        Raw t = parse_and();
        while (lx.accept(Tok::OrOr)) {
            Raw u = parse_and();
            if (t.termable && u.termable) {
                t = Raw(Term::apply(TermOp::Or, t.term, u.term));
            } else {
                // a || b  =  !(!a && !b)
                t = Raw(TemporalFormula::negation(TemporalFormula::conj(
                    TemporalFormula::negation(lower(t)), TemporalFormula::negation(lower(u)))));
            }
        }
        return t;
    }

    Raw parse_and() {
        Raw t = parse_until();
        while (lx.accept(Tok::AndAnd)) {
            Raw u = parse_until();
            if (t.termable && u.termable)
                t = Raw(Term::apply(TermOp::And, t.term, u.term));
            else
                t = Raw(TemporalFormula::conj(lower(t), lower(u)));
        }
        return t;
    }

    Raw parse_until() {
        Raw t = parse_unary();
        if (lx.peek().kind == Tok::Ident && lx.peek().text == "U") {
            lx.next();
            Raw u = parse_until();  // right-associative
            return Raw(TemporalFormula::until(lower(t), lower(u)));
        }
        return t;
    }

    Raw parse_unary() {
        const Token& t = lx.peek();
        if (t.kind == Tok::Bang) {
            lx.next();
            Raw u = parse_unary();
            if (u.termable) return Raw(Term::negate(u.term));
            return Raw(TemporalFormula::negation(u.tf));
        }
        if (t.kind == Tok::Ident && (t.text == "X" || t.text == "F" || t.text == "G")) {
            std::string op = lx.next().text;
            Raw u = parse_unary();
            if (op == "X") return Raw(TemporalFormula::next(lower(u)));
            if (op == "F") return Raw(TemporalFormula::eventually(lower(u)));
            return Raw(TemporalFormula::globally(lower(u)));
        }
        return parse_primary();
    }

    Raw parse_primary() {
        const Token& t = lx.peek();
        if (t.kind == Tok::Ident && (t.text == "forall" || t.text == "exists"))
            throw NonPrenexError("quantifier inside the temporal core at " + std::to_string(t.line) + ":" +
                                 std::to_string(t.column));
        if (t.kind == Tok::LParen) {
            lx.next();
            Raw r = parse_or();
            lx.expect(Tok::RParen, "')'");
            return r;
        }
        if (t.kind == Tok::LBracket) {
            lx.next();
            std::string name = lx.expect(Tok::Ident, "cell name").text;
            std::string trace;
            if (lx.accept(Tok::LBracket)) {
                trace = lx.expect(Tok::Ident, "trace variable").text;
                lx.expect(Tok::RBracket, "']'");
            }
            if (!lx.accept(Tok::LArrow)) {  // `< -` with space also accepted
                lx.expect(Tok::Lt, "'<-'");
                lx.expect(Tok::Minus, "'<-'");
            }
            detail::TermParser tp(lx, resolve);
            Term src = tp.parse_or();
            lx.expect(Tok::RBracket, "']'");
            Ident target = resolve(name, trace);
            if (target.kind != VarKind::Cell)
                throw ValidationError("update target must be a cell: " + target.to_string());
            return Raw(TemporalFormula::upd(UpdateTerm{target, src}));
        }
        // a comparison-level term atom (no &&, ||: those belong to this parser)
        detail::TermParser tp(lx, resolve);
        return Raw(tp.parse_cmp());
    }
};

}  // namespace detail

inline Formula parse_formula(std::string_view text, IdentResolver resolve = default_resolver()) {
    Lexer lx(text);
    Formula f;
    std::set<std::string> names;
    while (lx.peek().kind == Tok::Ident && (lx.peek().text == "forall" || lx.peek().text == "exists")) {
        Quantifier q = lx.next().text == "forall" ? Quantifier::Forall : Quantifier::Exists;
        std::string name = lx.expect(Tok::Ident, "trace variable").text;
        lx.expect(Tok::Dot, "'.'");
        if (!names.insert(name).second) throw ValidationError("duplicate trace variable " + name);
        f.prefix.push_back(QuantifiedTrace{q, name});
    }
    detail::FormulaParser p{lx, std::move(resolve)};
    auto raw = p.parse_or();
    f.core = p.lower(raw);
    if (!lx.at_end()) lx.fail("trailing input after formula");

    // trace-scope validation
    bool hyper = !f.prefix.empty();
    f.core.for_each_atom([&](const TemporalFormula& a) {
        auto check = [&](const Ident& id) {
            if (hyper) {
                if (id.trace.empty())
                    throw ValidationError("unindexed identifier " + id.name + " in a hyper formula");
                if (!names.count(id.trace))
                    throw ValidationError("trace variable " + id.trace + " not bound by the prefix");
            } else if (!id.trace.empty()) {
                throw ValidationError("trace-indexed identifier " + id.to_string() +
                                      " in a quantifier-free formula");
            }
        };
        if (a.kind() == TemporalFormula::Kind::Pred) {
            a.term().for_each_var(check);
        } else {
            check(a.update().target);
            a.update().source.for_each_var(check);
        }
    });
    return f;
}

}  // namespace hytsl
