#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "hytsl/ltl2buchi.hpp"
#include "hytsl/program.hpp"

using namespace hytsl;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string samples(const std::string& name) { return std::string(HYTSL_SAMPLES_DIR) + "/" + name; }

Ident cell(const std::string& n, const std::string& tr = "") { return Ident{n, VarKind::Cell, tr}; }
Ident input(const std::string& n, const std::string& tr = "") { return Ident{n, VarKind::Input, tr}; }

IdentResolver gni_resolver() {
    return [](const std::string& name, const std::string& trace) {
        return Ident{name, name == "i" ? VarKind::Input : VarKind::Cell, trace};
    };
}

int count_reachable(const BuchiAutomaton<Statement>& a) {
    return restrict_to_reachable(a).num_states();
}

}  // namespace

TEST_CASE("parse_program_automaton: the sample systems") {
    ProgramAutomaton fig = parse_program_automaton(slurp(samples("counter.pa")));
    CHECK(fig.aut.num_states() == 3);
    CHECK(fig.aut.transitions().size() == 4);
    CHECK(fig.cells.size() == 1);
    CHECK(fig.inputs.empty());

    ProgramAutomaton gni = parse_program_automaton(slurp(samples("gni.pa")));
    CHECK(gni.aut.num_states() == 3);
    CHECK(gni.aut.transitions().size() == 4);
    CHECK(gni.inputs.size() == 1);
    CHECK(gni.initial.at(cell("c")) == Value(0));
    CHECK_FALSE(gni.initial.contains(input("i")));  // inputs are never pinned

    ProgramAutomaton cy = parse_program_automaton(slurp(samples("cycle.pa")));
    CHECK(cy.aut.num_states() == 5);
    CHECK(cy.aut.transitions().size() == 6);
    CHECK(cy.cells.size() == 2);
}

TEST_CASE("parse_program_automaton: validation") {
    CHECK_THROWS_AS(parse_program_automaton("cells: c\nstate q0 initial accepting\n"
                                            "trans q0 -> q0 : d := 0\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_program_automaton("cells: c\nstate q0 initial\ntrans q0 -> q0 : c := 0\n"),
                    ValidationError);  // non-accepting state in system mode
    CHECK_THROWS_AS(parse_program_automaton("cells: c\ninputs: i\nstate q0 initial accepting\n"
                                            "trans q0 -> q0 : i := 0\n"),
                    ValidationError);  // assigning an input
    CHECK_THROWS_AS(parse_program_automaton("cells: c\ninputs: i\ninit: i = 0\n"
                                            "state q0 initial accepting\ntrans q0 -> q0 : c := 0\n"),
                    ValidationError);  // pinning an input
    CHECK_THROWS_AS(parse_program_automaton("cells: c\nstate q0 initial accepting\n"
                                            "trans q0 -> q0 : c := 0; c := 1\n"),
                    ValidationError);  // composed label in system mode
    CHECK_THROWS_AS(parse_program_automaton("cells: c\nstate q0 accepting\ntrans q0 -> q0 : c := 0\n"),
                    ValidationError);  // no initial state
    CHECK_THROWS_AS(parse_program_automaton("cells: c\nstate q0 initial accepting\nbogus line\n"), ParseError);
}

TEST_CASE("flatten") {
    auto rs = [](const std::string& t) {
        return parse_statement_text(t, default_resolver());
    };
    Statement abc = rs("a := 1; b := 2; c := 3");
    auto basics = flatten(abc);
    REQUIRE(basics.size() == 3);
    CHECK(basics[0].to_string() == "a := 1");
    CHECK(basics[2].to_string() == "c := 3");

    Statement lone = rs("assert(n > 0)");
    CHECK(flatten(lone).size() == 1);

    // left-nested seq construction flattens the same way (canonical form)
    Statement left = Statement::seq(Statement::seq(basics[0], basics[1]), basics[2]);
    CHECK(left == abc);
}

TEST_CASE("combine: the worked example shape") {
    // combine(n := 42, {[n <- n+7] -> true, n > 0 -> true}) with I = {i}
    AtomSet as;
    as.preds = {parse_term("n > 0")};
    as.upds = {UpdateTerm{cell("n"), parse_term("n + 7")}};
    Valuation l = Valuation::empty(2).with(0, true).with(1, true);
    Statement s = Statement::assign(cell("n"), Term::constant(42));
    Statement combined = combine(s, l, as, {input("i")});
    auto basics = flatten(combined);
    REQUIRE(basics.size() == 5);
    CHECK(basics[0].to_string() == "__tmp0 := n + 7");
    CHECK(basics[1].to_string() == "n := 42");
    CHECK(basics[2].to_string() == "i := *");
    CHECK(basics[3].to_string() == "assert(n > 0)");
    CHECK(basics[4].to_string() == "assert(n = __tmp0)");

    // negative polarities flip the assertions
    Valuation l2 = Valuation::empty(2);
    auto basics2 = flatten(combine(s, l2, as, {input("i")}));
    CHECK(basics2[3].to_string() == "assert(!(n > 0))");
    CHECK(basics2[4].to_string() == "assert(n != __tmp0)");

    // empty atom set: trivial assertions remain
    AtomSet empty;
    auto basics3 = flatten(combine(s, Valuation::empty(0), empty, {input("i")}));
    REQUIRE(basics3.size() == 4);  // s, i := *, assert(true), assert(true)
    CHECK(basics3[1].to_string() == "i := *");
    CHECK(basics3[2].to_string() == "assert(true)");
    CHECK(basics3[3].to_string() == "assert(true)");

    // flatten-length law: |upds| + |flatten(s)| + |I| + 2
    CHECK(basics.size() == as.upds.size() + flatten(s).size() + 1 + 2);
}

TEST_CASE("matches_step") {
    std::vector<Ident> cells{cell("n")};
    auto a = [&](long long n) { return Assignment(std::map<Ident, Value>{{cell("n"), Value(n)}}); };

    Statement assert_ge = Statement::assertion(parse_term("n >= 0"));
    CHECK(matches_step(a(0), a(0), assert_ge, cells));
    CHECK_FALSE(matches_step(a(-1), a(-1), assert_ge, cells));
    CHECK_FALSE(matches_step(a(1), a(2), assert_ge, cells));  // assert freezes cells

    Statement dec = Statement::assign(cell("n"), parse_term("n - 1"));
    CHECK(matches_step(a(0), a(-1), dec, cells));
    CHECK_FALSE(matches_step(a(0), a(0), dec, cells));

    // havoc frees the target and freezes the rest
    std::vector<Ident> two{cell("n"), cell("p")};
    auto a2 = [&](long long n, long long p) {
        return Assignment(std::map<Ident, Value>{{cell("n"), Value(n)}, {cell("p"), Value(p)}});
    };
    Statement hav = Statement::havoc(cell("n"));
    CHECK(matches_step(a2(0, 1), a2(7, 1), hav, two));
    CHECK_FALSE(matches_step(a2(0, 1), a2(7, 2), hav, two));
}

TEST_CASE("matches_step frame property by exhaustive search") {
    // for every basic statement and value pair in {-2..2}^2, cells outside
    // the written set never change in a matching step
    std::vector<Ident> cells{cell("n"), cell("p")};
    std::vector<Statement> stmts = {
        Statement::assign(cell("n"), parse_term("n - 1")),
        Statement::assign(cell("n"), Term::constant(1)),
        Statement::havoc(cell("n")),
        Statement::assertion(parse_term("n >= 0")),
    };
    auto a2 = [&](long long n, long long p) {
        return Assignment(std::map<Ident, Value>{{cell("n"), Value(n)}, {cell("p"), Value(p)}});
    };
    for (const auto& s : stmts)
        for (long long n0 = -2; n0 <= 2; ++n0)
            for (long long p0 = -2; p0 <= 2; ++p0)
                for (long long n1 = -2; n1 <= 2; ++n1)
                    for (long long p1 = -2; p1 <= 2; ++p1) {
                        if (!matches_step(a2(n0, p0), a2(n1, p1), s, cells)) continue;
                        CHECK(p1 == p0);  // p is never written
                        if (s.kind() == Statement::Kind::Assert) CHECK(n1 == n0);
                        if (s.kind() == Statement::Kind::Assign) CHECK(n1 == (s.source() == parse_term("n - 1") ? n0 - 1 : 1));
                    }
}

TEST_CASE("self_compose") {
    ProgramAutomaton gni = parse_program_automaton(slurp(samples("gni.pa")));

    // n = 1: isomorphic to P with renamed identifiers
    ProgramAutomaton p1 = self_compose(gni, 1, {"pi"});
    CHECK(p1.aut.num_states() == gni.aut.num_states());
    CHECK(p1.aut.transitions().size() == gni.aut.transitions().size());
    bool found = false;
    for (const auto& t : p1.aut.transitions())
        if (t.label.to_string() == "assert(i[pi] < 0)") found = true;
    CHECK(found);
    CHECK(p1.cells.size() == 1);
    CHECK(p1.cells[0] == cell("c", "pi"));

    // n = 2: 9 states, 5 reachable, combined branch asserts present
    ProgramAutomaton p2 = self_compose(gni, 2, {"pi", "pi2"});
    CHECK(p2.aut.num_states() == 9);
    CHECK(count_reachable(p2.aut) == 5);
    std::set<std::string> labels;
    for (const auto& t : p2.aut.transitions()) labels.insert(t.label.to_string());
    CHECK(labels.count("assert(i[pi] < 0); assert(i[pi2] < 0)"));
    CHECK(labels.count("assert(i[pi] < 0); assert(i[pi2] >= 0)"));
    CHECK(labels.count("c[pi] := 0; c[pi2] := 1"));
    // per-state outgoing degree is the product of component degrees
    CHECK(p2.aut.out(p2.aut.initial()).size() == 4);

    // provenance carries the renamed statement tuples
    REQUIRE(p2.has_provenance());
    for (size_t i = 0; i < p2.aut.transitions().size(); ++i) {
        const auto& tuple = p2.provenance[i].tuple;
        REQUIRE(tuple.size() == 2);
        CHECK(Statement::seq_of(tuple) == p2.aut.transitions()[i].label);
    }

    // the cycle system squared: 25 states, 7 reachable, the q3q4 loop label
    ProgramAutomaton cy = parse_program_automaton(slurp(samples("cycle.pa")));
    ProgramAutomaton cy2 = self_compose(cy, 2, {"pi", "pi2"});
    CHECK(cy2.aut.num_states() == 25);
    CHECK(count_reachable(cy2.aut) == 7);
    std::set<std::string> cy_labels;
    for (const auto& t : cy2.aut.transitions()) cy_labels.insert(t.label.to_string());
    CHECK(cy_labels.count("n[pi] := n[pi] - 1; n[pi2] := n[pi2] - 2"));
}

TEST_CASE("combined_product on the GNI system") {
    ProgramAutomaton gni = parse_program_automaton(slurp(samples("gni.pa")));
    ProgramAutomaton p2 = self_compose(gni, 2, {"pi", "pi2"});
    Formula psi = parse_formula("forall pi. exists pi2. G (i[pi2] = 0 && c[pi] = c[pi2])", gni_resolver());
    Skeleton sk = ltl_skeleton(psi);
    BuchiAutomaton<Valuation> aps = translate(sk);
    CHECK(aps.num_states() == 1);  // single accepting state with a self-loop

    ProgramAutomaton prod = combined_product(p2, aps, sk.atom_set);
    CHECK(prod.aut.num_states() == 9);
    CHECK(count_reachable(prod.aut) == 5);
    // every state accepting (formula component accepting)
    for (int s = 0; s < prod.aut.num_states(); ++s) CHECK(prod.aut.is_accepting(s));
    // every edge ends with the tau_P assertion and re-reads both inputs
    for (const auto& t : prod.aut.transitions()) {
        auto basics = flatten(t.label);
        CHECK(basics[basics.size() - 2].to_string() == "assert(i[pi2] = 0 && c[pi] = c[pi2])");
        CHECK(basics.back().to_string() == "assert(true)");
        int havocs = 0;
        for (const auto& b : basics)
            if (b.kind() == Statement::Kind::Havoc && b.cell().name == "i") ++havocs;
        CHECK(havocs == 2);
    }
    // C* contains the former inputs as cells
    bool has_i_cell = false;
    for (const auto& c : prod.cells)
        if (c.name == "i" && c.kind == VarKind::Cell) has_i_cell = true;
    CHECK(has_i_cell);
    CHECK(prod.inputs.empty());

    // provenance: tuple and label recorded
    REQUIRE(prod.has_provenance());
    for (const auto& pr : prod.provenance) {
        CHECK(pr.tuple.size() == 2);
        CHECK(pr.label.has_value());
    }
}

TEST_CASE("combined_product with the universal one-state formula automaton") {
    ProgramAutomaton fig = parse_program_automaton(slurp(samples("counter.pa")));
    BuchiAutomaton<Valuation> univ;
    univ.add_state(true);
    univ.set_initial(0);
    univ.add_transition(0, Valuation::empty(0), 0);
    AtomSet empty;
    ProgramAutomaton prod = combined_product(fig, univ, empty);
    CHECK(prod.aut.num_states() == fig.aut.num_states());
    CHECK(prod.aut.transitions().size() == fig.aut.transitions().size());
    // labels gain only the trivial wrapper
    for (const auto& t : prod.aut.transitions()) {
        auto basics = flatten(t.label);
        REQUIRE(basics.size() == 3);  // statement, assert(true), assert(true)
        CHECK(basics[1].to_string() == "assert(true)");
    }
}

TEST_CASE("universal_projection") {
    ProgramAutomaton gni = parse_program_automaton(slurp(samples("gni.pa")));
    ProgramAutomaton p2 = self_compose(gni, 2, {"pi", "pi2"});
    Formula psi = parse_formula("forall pi. exists pi2. G (i[pi2] = 0 && c[pi] = c[pi2])", gni_resolver());
    Skeleton sk = ltl_skeleton(psi);
    ProgramAutomaton prod = combined_product(p2, translate(sk), sk.atom_set);

    // m = n strips the combine wrapper back to the bare statement tuples
    ProgramAutomaton full = universal_projection(prod, gni, 2);
    std::set<std::string> labels;
    for (const auto& t : full.aut.transitions()) labels.insert(t.label.to_string());
    CHECK(labels.count("assert(i[pi] < 0); assert(i[pi2] < 0)"));
    CHECK(labels.count("c[pi] := 0; c[pi2] := 1"));

    // m = 1 keeps only the universal trace's statements, deduplicated
    ProgramAutomaton proj = universal_projection(prod, gni, 1);
    std::set<std::string> labels1;
    for (const auto& t : proj.aut.transitions()) labels1.insert(t.label.to_string());
    CHECK(labels1.size() == 4);
    CHECK(labels1.count("assert(i[pi] < 0)"));
    CHECK(labels1.count("assert(i[pi] >= 0)"));
    CHECK(labels1.count("c[pi] := 0"));
    CHECK(labels1.count("c[pi] := 1"));
    CHECK(proj.aut.num_states() == prod.aut.num_states());
    CHECK(proj.inputs.size() == 1);
    CHECK(proj.inputs[0] == input("i", "pi"));

    // projection without provenance is rejected
    ProgramAutomaton bare = gni;
    bare.provenance.clear();
    bare.trace_names = {"pi"};
    CHECK_THROWS_AS(universal_projection(bare, gni, 1), MissingProvenance);
}

TEST_CASE("combined-product words project to component-accepted words") {
    ProgramAutomaton gni = parse_program_automaton(slurp(samples("gni.pa")));
    ProgramAutomaton p2 = self_compose(gni, 2, {"pi", "pi2"});
    Formula psi = parse_formula("forall pi. exists pi2. G (i[pi2] = 0 && c[pi] = c[pi2])", gni_resolver());
    Skeleton sk = ltl_skeleton(psi);
    BuchiAutomaton<Valuation> aps = translate(sk);
    ProgramAutomaton prod = combined_product(p2, aps, sk.atom_set);

    auto lasso = is_empty(prod.aut);
    REQUIRE(lasso.has_value());
    auto prov_of = [&](const Transition<Statement>& t) -> const TransitionProvenance& {
        const auto& ts = prod.aut.transitions();
        for (size_t i = 0; i < ts.size(); ++i)
            if (ts[i] == t) return prod.provenance[i];
        throw Error("transition not found");
    };
    std::vector<Statement> p_stem, p_loop;
    std::vector<Valuation> a_stem, a_loop;
    for (const auto& t : lasso->stem) {
        p_stem.push_back(Statement::seq_of(prov_of(t).tuple));
        a_stem.push_back(*prov_of(t).label);
    }
    for (const auto& t : lasso->loop) {
        p_loop.push_back(Statement::seq_of(prov_of(t).tuple));
        a_loop.push_back(*prov_of(t).label);
    }
    CHECK(accepts_lasso(p2.aut, p_stem, p_loop));
    CHECK(accepts_lasso(aps, a_stem, a_loop));
}

TEST_CASE("split_tuple_label inverts self-composition labels") {
    ProgramAutomaton gni = parse_program_automaton(slurp(samples("gni.pa")));
    ProgramAutomaton p2 = self_compose(gni, 2, {"pi", "pi2"});
    for (size_t i = 0; i < p2.aut.transitions().size(); ++i) {
        auto parts = split_tuple_label(p2.aut.transitions()[i].label, 2);
        REQUIRE(parts.size() == 2);
        CHECK(parts[0] == p2.provenance[i].tuple[0]);
        CHECK(parts[1] == p2.provenance[i].tuple[1]);
    }
}
