#include "doctest.h"

#include <random>

#include "hytsl/bigint.hpp"
#include "hytsl/terms.hpp"

using namespace hytsl;

namespace {

Ident cell(const std::string& n, const std::string& tr = "") { return Ident{n, VarKind::Cell, tr}; }
Ident input(const std::string& n, const std::string& tr = "") { return Ident{n, VarKind::Input, tr}; }

// Independent oracle: a second recursive evaluator written before terms.hpp's,
// structured as a switch over the printed operator instead of the enum.
Value naive_eval(const Term& t, const Assignment& a) {
    if (t.kind() == Term::Kind::Const) return t.konst();
    if (t.kind() == Term::Kind::Var) return a.at(t.var());
    std::vector<Value> vs;
    for (const auto& arg : t.args()) vs.push_back(naive_eval(arg, a));
    switch (t.op()) {
        case TermOp::Add: return Value(vs[0].as_int() + vs[1].as_int());
        case TermOp::Sub: return Value(vs[0].as_int() - vs[1].as_int());
        case TermOp::Mul: return Value(vs[0].as_int() * vs[1].as_int());
        case TermOp::Eq: return Value::boolean(vs[0] == vs[1]);
        case TermOp::Ne: return Value::boolean(!(vs[0] == vs[1]));
        case TermOp::Lt: return Value::boolean(vs[0].as_int() < vs[1].as_int());
        case TermOp::Le: return Value::boolean(vs[0].as_int() <= vs[1].as_int());
        case TermOp::Gt: return Value::boolean(vs[0].as_int() > vs[1].as_int());
        case TermOp::Ge: return Value::boolean(vs[0].as_int() >= vs[1].as_int());
        case TermOp::And: return Value::boolean(vs[0].as_bool() && vs[1].as_bool());
        case TermOp::Or: return Value::boolean(vs[0].as_bool() || vs[1].as_bool());
        case TermOp::Not: return Value::boolean(!vs[0].as_bool());
    }
    throw Error("bad op");
}

Term random_term(std::mt19937& rng, int depth, Sort want, const std::vector<Ident>& vars) {
    auto pick = [&](int n) { return static_cast<int>(rng() % n); };
    if (want == Sort::Int) {
        if (depth <= 0 || pick(3) == 0) {
            if (pick(2) == 0) return Term::constant(pick(7) - 3);
            return Term::variable(vars[pick(static_cast<int>(vars.size()))]);
        }
        TermOp ops[] = {TermOp::Add, TermOp::Sub, TermOp::Mul};
        TermOp op = ops[pick(3)];
        if (op == TermOp::Mul)  // stay linear: constant times term
            return Term::apply(op, Term::constant(pick(5) - 2), random_term(rng, depth - 1, Sort::Int, vars));
        return Term::apply(op, random_term(rng, depth - 1, Sort::Int, vars),
                           random_term(rng, depth - 1, Sort::Int, vars));
    }
    if (depth <= 0 || pick(4) == 0) {
        TermOp cmps[] = {TermOp::Eq, TermOp::Ne, TermOp::Lt, TermOp::Le, TermOp::Gt, TermOp::Ge};
        return Term::apply(cmps[pick(6)], random_term(rng, depth - 1, Sort::Int, vars),
                           random_term(rng, depth - 1, Sort::Int, vars));
    }
    switch (pick(3)) {
        case 0: return Term::apply(TermOp::And, random_term(rng, depth - 1, Sort::Bool, vars),
                                   random_term(rng, depth - 1, Sort::Bool, vars));
        case 1: return Term::apply(TermOp::Or, random_term(rng, depth - 1, Sort::Bool, vars),
                                   random_term(rng, depth - 1, Sort::Bool, vars));
        default: return Term::negate(random_term(rng, depth - 1, Sort::Bool, vars));
    }
}

}  // namespace

TEST_CASE("bigint arithmetic basics") {
    CHECK(BigInt(0).to_string() == "0");
    CHECK((BigInt(35) + BigInt(7)).to_string() == "42");
    CHECK((BigInt(-5) * BigInt(7)).to_string() == "-35");
    CHECK((BigInt(1) - BigInt(3)).to_string() == "-2");
    CHECK(BigInt::from_string("-123456789012345678901234567890").to_string() ==
          "-123456789012345678901234567890");
    BigInt big = BigInt::from_string("123456789012345678901234567890");
    CHECK((big * big - big * big).is_zero());
    CHECK(BigInt::floor_div(BigInt(7), BigInt(2)) == BigInt(3));
    CHECK(BigInt::floor_div(BigInt(-7), BigInt(2)) == BigInt(-4));
    CHECK(BigInt::floor_mod(BigInt(-7), BigInt(2)) == BigInt(1));
    CHECK(BigInt::gcd(BigInt(12), BigInt(-18)) == BigInt(6));
    CHECK(BigInt(-3) < BigInt(2));
    CHECK(BigInt(-3).to_int64() == -3);
}

TEST_CASE("bigint division against 64-bit reference") {
    std::mt19937 rng(7);
    for (int i = 0; i < 2000; ++i) {
        long long a = static_cast<long long>(rng()) - 2147483648LL;
        long long b = static_cast<long long>(rng() % 1000) - 500;
        if (b == 0) continue;
        BigInt q, r;
        BigInt::divmod_trunc(BigInt(a), BigInt(b), q, r);
        CHECK(q == BigInt(a / b));
        CHECK(r == BigInt(a % b));
    }
}

TEST_CASE("evaluate base cases") {
    Assignment a(std::map<Ident, Value>{{cell("c"), Value(5)}});
    CHECK(evaluate(Term::variable(cell("c")), a) == Value(5));

    Assignment a2(std::map<Ident, Value>{{cell("c"), Value(35)}});
    Term plus = Term::apply(TermOp::Add, Term::variable(cell("c")), Term::constant(7));
    CHECK(evaluate(plus, a2) == Value(42));
}

TEST_CASE("evaluate matches independent oracle on a pinned case and at random") {
    Assignment a(std::map<Ident, Value>{{input("i"), Value(-3)}, {cell("c"), Value(0)}});
    Term t = Term::apply(TermOp::And,
                         Term::apply(TermOp::Lt, Term::variable(input("i")), Term::constant(0)),
                         Term::apply(TermOp::Eq, Term::variable(cell("c")), Term::constant(0)));
    CHECK(evaluate(t, a) == Value::boolean(true));
    CHECK(naive_eval(t, a) == Value::boolean(true));

    std::vector<Ident> vars = {cell("c"), cell("n"), input("i")};
    std::mt19937 rng(13);
    for (int iter = 0; iter < 500; ++iter) {
        Term r = random_term(rng, 3, iter % 2 ? Sort::Bool : Sort::Int, vars);
        std::map<Ident, Value> m;
        for (const auto& v : vars) m[v] = Value(static_cast<long long>(rng() % 5) - 2);
        Assignment asg(m);
        CHECK(evaluate(r, asg) == naive_eval(r, asg));
    }
}

TEST_CASE("predicate terms evaluate to a boolean for every assignment") {
    std::vector<Ident> vars = {cell("c"), cell("n")};
    std::mt19937 rng(99);
    for (int iter = 0; iter < 200; ++iter) {
        Term p = random_term(rng, 3, Sort::Bool, vars);
        REQUIRE(is_boolean_sorted(p));
        for (long long x = -2; x <= 2; ++x) {
            Assignment a(std::map<Ident, Value>{{cell("c"), Value(x)}, {cell("n"), Value(-x)}});
            CHECK(evaluate(p, a).is_bool());
        }
    }
}

TEST_CASE("update_holds") {
    Assignment prev(std::map<Ident, Value>{{cell("n"), Value(35)}});
    Assignment cur(std::map<Ident, Value>{{cell("n"), Value(42)}});
    UpdateTerm u{cell("n"), parse_term("n + 7")};
    CHECK(update_holds(u, prev, cur));

    // identity update holds on any assignment paired with itself
    UpdateTerm id{cell("c"), Term::variable(cell("c"))};
    for (long long v = -2; v <= 2; ++v) {
        Assignment a(std::map<Ident, Value>{{cell("c"), Value(v)}});
        CHECK(update_holds(id, a, a));
    }

    UpdateTerm zero{cell("c"), Term::constant(0)};
    Assignment one(std::map<Ident, Value>{{cell("c"), Value(1)}});
    CHECK_FALSE(update_holds(zero, one, one));
}

TEST_CASE("parse_term shapes") {
    Term t = parse_term("n + 7");
    REQUIRE(t.kind() == Term::Kind::Apply);
    CHECK(t.op() == TermOp::Add);
    CHECK(t.args()[0] == Term::variable(cell("n")));
    CHECK(t.args()[1] == Term::constant(7));

    Term h = parse_term("i[pi2] = 0 && c[pi] = c[pi2]");
    REQUIRE(h.kind() == Term::Kind::Apply);
    CHECK(h.op() == TermOp::And);
    CHECK(h.args()[0].op() == TermOp::Eq);
    CHECK(h.args()[0].args()[0].var().trace == "pi2");
    CHECK(h.args()[1].args()[0].var() == cell("c", "pi"));

    Term g = parse_term("n >= 0");
    CHECK(g.op() == TermOp::Ge);
    CHECK(g.args()[1] == Term::constant(0));
}

TEST_CASE("parse errors carry a location") {
    CHECK_THROWS_AS(parse_term("n +"), ParseError);
    CHECK_THROWS_AS(parse_term("(n + 1"), ParseError);
    CHECK_THROWS_AS(parse_term("n 1"), ParseError);
    try {
        parse_term("n @ 1");
        FAIL("expected throw");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 3);
    }
}

TEST_CASE("print/parse round trip on random terms") {
    std::vector<Ident> vars = {cell("c"), cell("n"), cell("p")};
    std::mt19937 rng(4242);
    for (int iter = 0; iter < 400; ++iter) {
        Term t = random_term(rng, 4, iter % 2 ? Sort::Bool : Sort::Int, vars);
        Term back = parse_term(t.to_string());
        CHECK(back == t);
    }
}

TEST_CASE("precedence: ! > * > +- > comparisons > && > ||") {
    Term t = parse_term("a + 2 * b = c || !(a = b) && c < 1");
    CHECK(t.op() == TermOp::Or);
    CHECK(t.args()[0].op() == TermOp::Eq);
    CHECK(t.args()[0].args()[0].op() == TermOp::Add);
    CHECK(t.args()[0].args()[0].args()[1].op() == TermOp::Mul);
    CHECK(t.args()[1].op() == TermOp::And);
    CHECK(t.args()[1].args()[0].op() == TermOp::Not);
}

TEST_CASE("sort checking rejects ill-sorted terms") {
    CHECK_THROWS_AS(sort_of(parse_term("1 + (a = b)")), SortMismatch);
    CHECK_THROWS_AS(sort_of(parse_term("a && b")), SortMismatch);
    CHECK_THROWS_AS(sort_of(parse_term("true = 1")), SortMismatch);
    CHECK(sort_of(parse_term("a*2 - 1 <= b")) == Sort::Bool);
}

TEST_CASE("unbound variable lookups are errors") {
    Assignment a(std::map<Ident, Value>{{cell("c"), Value(1)}});
    CHECK_THROWS_AS(evaluate(Term::variable(cell("x")), a), UnboundVariable);
    // identifier identity is (name, trace); the kind tag is bookkeeping
    CHECK(evaluate(Term::variable(input("c")), a) == Value(1));
    CHECK_THROWS_AS(evaluate(Term::variable(cell("c", "pi")), a), UnboundVariable);
}
