#pragma once

#include <map>
#include <string>
#include <vector>

#include "hytsl/buchi.hpp"
#include "hytsl/formula.hpp"
#include "hytsl/valuation.hpp"

namespace hytsl {

// LTL-to-Büchi translation over an alphabet of total valuations. Closure
// tableau: states are locally consistent subsets of the subformula closure,
// a transition into a state reads a letter agreeing with that state's atoms,
// and one acceptance set per until obligation is degeneralized away with the
// counter product.

namespace detail {

struct LtlClosure {
    struct Sub {
        LtlFormula node = LtlFormula::truth(true);
        int child0 = -1;
        int child1 = -1;
    };
    std::vector<Sub> subs;
    std::map<std::string, int> index;

    int collect(const LtlFormula& f) {
        std::string key = f.to_string();
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        Sub s;
        s.node = f;
        using K = LtlFormula::Kind;
        switch (f.kind()) {
            case K::True:
            case K::False:
            case K::Atom:
                break;
            case K::Not:
            case K::Next:
                s.child0 = collect(f.child());
                break;
            case K::And:
            case K::Until:
                s.child0 = collect(f.child(0));
                s.child1 = collect(f.child(1));
                break;
        }
        int id = static_cast<int>(subs.size());
        subs.push_back(s);
        index.emplace(std::move(key), id);
        return id;
    }
};

}  // namespace detail

inline BuchiAutomaton<Valuation> translate(const LtlFormula& f, int num_atoms) {
    using K = LtlFormula::Kind;
    detail::LtlClosure cl;
    int root = cl.collect(f);
    int n = static_cast<int>(cl.subs.size());
    if (n > 18) throw Error("LTL skeleton too large to translate");

    auto in = [](uint32_t mask, int i) { return i >= 0 && ((mask >> i) & 1u); };

    auto consistent = [&](uint32_t mask) {
        for (int i = 0; i < n; ++i) {
            const auto& s = cl.subs[static_cast<size_t>(i)];
            switch (s.node.kind()) {
                case K::True:
                    if (!in(mask, i)) return false;
                    break;
                case K::False:
                    if (in(mask, i)) return false;
                    break;
                case K::Not:
                    if (in(mask, i) == in(mask, s.child0)) return false;
                    break;
                case K::And:
                    if (in(mask, i) != (in(mask, s.child0) && in(mask, s.child1))) return false;
                    break;
                case K::Until:
                    if (in(mask, s.child1) && !in(mask, i)) return false;
                    if (in(mask, i) && !in(mask, s.child1) && !in(mask, s.child0)) return false;
                    break;
                default:
                    break;
            }
        }
        return true;
    };

    auto step_ok = [&](uint32_t from, uint32_t to) {
        for (int i = 0; i < n; ++i) {
            const auto& s = cl.subs[static_cast<size_t>(i)];
            if (s.node.kind() == K::Next) {
                if (in(from, i) != in(to, s.child0)) return false;
            } else if (s.node.kind() == K::Until) {
                if (in(from, i) && !in(from, s.child1) && !in(to, i)) return false;
                if (!in(from, i) && in(from, s.child0) && in(to, i)) return false;
            }
        }
        return true;
    };

    std::vector<uint32_t> states;
    for (uint32_t mask = 0; mask < (1u << n); ++mask)
        if (consistent(mask)) states.push_back(mask);

    // letters compatible with a target state: agree on every atom subformula
    if (num_atoms > 20) throw Error("atom set too large for an explicit valuation alphabet");
    std::vector<std::vector<Valuation>> letters(states.size());
    for (size_t si = 0; si < states.size(); ++si) {
        for (uint64_t bits = 0; bits < (uint64_t{1} << num_atoms); ++bits) {
            Valuation v{bits, num_atoms};
            bool ok = true;
            for (int i = 0; i < n && ok; ++i) {
                const auto& s = cl.subs[static_cast<size_t>(i)];
                if (s.node.kind() == K::Atom) ok = v.test(s.node.atom_index()) == in(states[si], i);
            }
            if (ok) letters[si].push_back(v);
        }
    }

    // raw automaton: state 0 is the fresh initial, then one per subset
    BuchiAutomaton<Valuation> raw;
    raw.add_state(false, "init");
    for (uint32_t mask : states) raw.add_state(false, "s" + std::to_string(mask));
    raw.set_initial(0);
    for (size_t si = 0; si < states.size(); ++si) {
        if (in(states[si], root))
            for (const Valuation& v : letters[si]) raw.add_transition(0, v, static_cast<int>(si) + 1);
    }
    for (size_t si = 0; si < states.size(); ++si)
        for (size_t ti = 0; ti < states.size(); ++ti) {
            if (!step_ok(states[si], states[ti])) continue;
            for (const Valuation& v : letters[ti])
                raw.add_transition(static_cast<int>(si) + 1, v, static_cast<int>(ti) + 1);
        }

    // one acceptance set per until: u fulfilled or not pending
    std::vector<std::vector<bool>> sets;
    for (int i = 0; i < n; ++i) {
        const auto& s = cl.subs[static_cast<size_t>(i)];
        if (s.node.kind() != K::Until) continue;
        std::vector<bool> acc(static_cast<size_t>(raw.num_states()), false);
        for (size_t si = 0; si < states.size(); ++si)
            acc[si + 1] = !in(states[si], i) || in(states[si], s.child1);
        sets.push_back(std::move(acc));
    }

    BuchiAutomaton<Valuation> out = degeneralize(raw, sets);
    out = restrict_to_reachable(out);
    return bisim_quotient(out);
}

inline BuchiAutomaton<Valuation> translate(const Skeleton& sk) {
    return translate(sk.ltl, sk.atom_set.size());
}

}  // namespace hytsl
