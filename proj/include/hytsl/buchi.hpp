#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hytsl/errors.hpp"

namespace hytsl {

// Generic Büchi automaton over label type L. L needs value semantics,
// operator== and operator< (labels compare structurally; for statements the
// order is the structural AST order). States are dense indices; iteration is
// deterministic everywhere: transitions are kept sorted by (from, label, to).

template <class L>
struct Transition {
    int from = 0;
    L label{};
    int to = 0;

    friend bool operator==(const Transition& a, const Transition& b) {
        return a.from == b.from && a.to == b.to && a.label == b.label;
    }
    friend bool operator<(const Transition& a, const Transition& b) {
        if (a.from != b.from) return a.from < b.from;
        if (a.label == b.label) return a.to < b.to;
        return a.label < b.label;
    }
};

template <class L>
class BuchiAutomaton {
public:
    int add_state(bool accepting = false, std::string name = {}) {
        accepting_.push_back(accepting);
        names_.push_back(std::move(name));
        return static_cast<int>(accepting_.size()) - 1;
    }

    void set_initial(int s) { initial_ = s; }
    void set_accepting(int s, bool a = true) { accepting_.at(static_cast<size_t>(s)) = a; }
    void set_name(int s, std::string n) { names_.at(static_cast<size_t>(s)) = std::move(n); }

    void add_transition(int from, L label, int to) {
        check_state(from);
        check_state(to);
        transitions_.push_back(Transition<L>{from, std::move(label), to});
        sorted_ = false;
    }

    int num_states() const { return static_cast<int>(accepting_.size()); }
    int initial() const { return initial_; }
    bool is_accepting(int s) const { return accepting_.at(static_cast<size_t>(s)); }
    const std::string& name(int s) const { return names_.at(static_cast<size_t>(s)); }

    const std::vector<Transition<L>>& transitions() const {
        finalize();
        return transitions_;
    }

    // transition indices leaving `s`, in sorted order
    std::vector<int> out(int s) const {
        finalize();
        std::vector<int> r;
        for (int i = row_begin(s); i < static_cast<int>(transitions_.size()) && transitions_[i].from == s; ++i)
            r.push_back(i);
        return r;
    }

    std::vector<L> alphabet() const {
        finalize();
        std::vector<L> r;
        for (const auto& t : transitions_) r.push_back(t.label);
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        return r;
    }

    bool any_accepting() const {
        for (bool a : accepting_)
            if (a) return true;
        return false;
    }

private:
    int initial_ = 0;
    std::vector<bool> accepting_;
    std::vector<std::string> names_;
    mutable std::vector<Transition<L>> transitions_;
    mutable bool sorted_ = true;

    void check_state(int s) const {
        if (s < 0 || s >= num_states()) throw Error("transition endpoint out of range");
    }

    void finalize() const {
        if (sorted_) return;
        std::stable_sort(transitions_.begin(), transitions_.end(),
                         [](const Transition<L>& a, const Transition<L>& b) { return a < b; });
        // the transition relation is a set
        transitions_.erase(std::unique(transitions_.begin(), transitions_.end()), transitions_.end());
        sorted_ = true;
    }

    int row_begin(int s) const {
        int lo = 0, hi = static_cast<int>(transitions_.size());
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (transitions_[static_cast<size_t>(mid)].from < s)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    }
};

// Finite witness of acceptance: stem reaches the loop, the loop closes on
// itself and visits at least one accepting state.
template <class L>
struct Lasso {
    std::vector<Transition<L>> stem;
    std::vector<Transition<L>> loop;

    std::vector<L> stem_labels() const {
        std::vector<L> r;
        for (const auto& t : stem) r.push_back(t.label);
        return r;
    }
    std::vector<L> loop_labels() const {
        std::vector<L> r;
        for (const auto& t : loop) r.push_back(t.label);
        return r;
    }
};

// ---------------------------------------------------------------------------
// Exact membership of an ultimately periodic word.

template <class L>
bool accepts_lasso(const BuchiAutomaton<L>& a, const std::vector<L>& stem, const std::vector<L>& loop) {
    if (loop.empty()) throw Error("lasso needs a nonempty loop");
    std::set<int> cur{a.initial()};
    for (const L& l : stem) {
        std::set<int> next;
        for (int s : cur)
            for (int ti : a.out(s)) {
                const auto& t = a.transitions()[static_cast<size_t>(ti)];
                if (t.label == l) next.insert(t.to);
            }
        cur = std::move(next);
        if (cur.empty()) return false;
    }
    // product of states with loop positions; acceptance = reachable cycle
    // through a node whose automaton state is accepting
    int L_len = static_cast<int>(loop.size());
    auto id = [&](int s, int i) { return s * L_len + i; };
    int n = a.num_states() * L_len;
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    for (int s = 0; s < a.num_states(); ++s)
        for (int ti : a.out(s)) {
            const auto& t = a.transitions()[static_cast<size_t>(ti)];
            for (int i = 0; i < L_len; ++i)
                if (t.label == loop[static_cast<size_t>(i)])
                    adj[static_cast<size_t>(id(s, i))].push_back(id(t.to, (i + 1) % L_len));
        }
    std::vector<bool> reach(static_cast<size_t>(n), false);
    std::vector<int> stack;
    for (int s : cur) {
        if (!reach[static_cast<size_t>(id(s, 0))]) {
            reach[static_cast<size_t>(id(s, 0))] = true;
            stack.push_back(id(s, 0));
        }
    }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<size_t>(v)])
            if (!reach[static_cast<size_t>(w)]) {
                reach[static_cast<size_t>(w)] = true;
                stack.push_back(w);
            }
    }
    // node v is on a cycle iff v reaches itself
    for (int v = 0; v < n; ++v) {
        if (!reach[static_cast<size_t>(v)] || !a.is_accepting(v / L_len)) continue;
        std::vector<bool> seen(static_cast<size_t>(n), false);
        std::vector<int> st{v};
        while (!st.empty()) {
            int u = st.back();
            st.pop_back();
            for (int w : adj[static_cast<size_t>(u)]) {
                if (w == v) return true;
                if (!seen[static_cast<size_t>(w)]) {
                    seen[static_cast<size_t>(w)] = true;
                    st.push_back(w);
                }
            }
        }
    }
    return false;
}

template <class L>
bool accepts_lasso(const BuchiAutomaton<L>& a, const Lasso<L>& lasso) {
    return accepts_lasso(a, lasso.stem_labels(), lasso.loop_labels());
}

// ---------------------------------------------------------------------------
// Emptiness: returns a short accepting lasso when the language is nonempty.
// Deterministic: BFS over sorted transitions, accepting states in index order.

namespace detail {

template <class L>
std::optional<std::vector<Transition<L>>> shortest_path(const BuchiAutomaton<L>& a, int from, int to,
                                                        bool at_least_one_step) {
    // BFS on transitions; parent[] stores the transition index used to reach
    std::vector<int> parent(static_cast<size_t>(a.num_states()), -2);
    std::vector<int> queue;
    auto expand = [&](int s) {
        for (int ti : a.out(s)) {
            const auto& t = a.transitions()[static_cast<size_t>(ti)];
            if (parent[static_cast<size_t>(t.to)] == -2) {
                parent[static_cast<size_t>(t.to)] = ti;
                queue.push_back(t.to);
            }
            if (t.to == to && at_least_one_step) return true;
        }
        return false;
    };
    if (!at_least_one_step && from == to) return std::vector<Transition<L>>{};
    bool found = expand(from);
    size_t qi = 0;
    while (!found && qi < queue.size()) {
        int s = queue[qi++];
        if (s == to) break;
        found = expand(s);
    }
    if (parent[static_cast<size_t>(to)] == -2) return std::nullopt;
    std::vector<Transition<L>> path;
    int cur = to;
    for (;;) {
        int ti = parent[static_cast<size_t>(cur)];
        const auto& t = a.transitions()[static_cast<size_t>(ti)];
        path.push_back(t);
        cur = t.from;
        if (cur == from && (path.size() >= 1)) {
            // Stop at the first arrival back at `from`: parent links form a
            // tree rooted at `from`, so this terminates.
            break;
        }
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace detail

template <class L>
std::optional<Lasso<L>> is_empty(const BuchiAutomaton<L>& a) {
    // reachable accepting state with a cycle back to itself
    std::vector<bool> reach(static_cast<size_t>(a.num_states()), false);
    reach[static_cast<size_t>(a.initial())] = true;
    std::vector<int> stack{a.initial()};
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int ti : a.out(s)) {
            int to = a.transitions()[static_cast<size_t>(ti)].to;
            if (!reach[static_cast<size_t>(to)]) {
                reach[static_cast<size_t>(to)] = true;
                stack.push_back(to);
            }
        }
    }
    for (int f = 0; f < a.num_states(); ++f) {
        if (!a.is_accepting(f) || !reach[static_cast<size_t>(f)]) continue;
        auto loop = detail::shortest_path(a, f, f, true);
        if (!loop) continue;
        auto stem = detail::shortest_path(a, a.initial(), f, false);
        if (!stem) continue;  // unreachable would have been filtered already
        Lasso<L> l;
        l.stem = std::move(*stem);
        l.loop = std::move(*loop);
        return l;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Degeneralization: counter product over a list of acceptance sets.
// tr_origin (when provided) receives, per output transition, the index of the
// originating transition of `base`.

template <class L>
BuchiAutomaton<L> degeneralize(const BuchiAutomaton<L>& base, const std::vector<std::vector<bool>>& sets,
                               std::vector<int>* tr_origin = nullptr) {
    BuchiAutomaton<L> out;
    if (tr_origin) tr_origin->clear();
    int m = static_cast<int>(sets.size());
    if (m == 0) {
        // no obligations: every state accepting
        for (int s = 0; s < base.num_states(); ++s) out.add_state(true, base.name(s));
        out.set_initial(base.initial());
        int idx = 0;
        for (const auto& t : base.transitions()) {
            out.add_transition(t.from, t.label, t.to);
            if (tr_origin) tr_origin->push_back(idx);
            ++idx;
        }
        return out;
    }
    std::map<std::pair<int, int>, int> ids;
    std::vector<std::pair<int, int>> order;
    auto intern = [&](int s, int c) {
        auto key = std::make_pair(s, c);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        bool acc = c == 0 && sets[0][static_cast<size_t>(s)];
        int id = out.add_state(acc, base.name(s).empty() ? "" : base.name(s) + "#" + std::to_string(c));
        ids.emplace(key, id);
        order.push_back(key);
        return id;
    };
    int init = intern(base.initial(), 0);
    out.set_initial(init);
    struct Raw {
        Transition<L> t;
        int origin;
    };
    std::vector<Raw> raw;
    for (size_t i = 0; i < order.size(); ++i) {
        auto [s, c] = order[i];
        int from = ids[{s, c}];
        int next_c = sets[static_cast<size_t>(c)][static_cast<size_t>(s)] ? (c + 1) % m : c;
        for (int ti : base.out(s)) {
            const auto& t = base.transitions()[static_cast<size_t>(ti)];
            int to = intern(t.to, next_c);
            raw.push_back(Raw{Transition<L>{from, t.label, to}, ti});
        }
    }
    // insert in sorted, deduplicated order so provenance aligns with transitions()
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
        if (x.t == y.t) return false;
        return x.t < y.t;
    });
    raw.erase(std::unique(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.t == y.t; }),
              raw.end());
    for (const auto& r : raw) {
        out.add_transition(r.t.from, r.t.label, r.t.to);
        if (tr_origin) tr_origin->push_back(r.origin);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Intersection via the two-set counter product. left_origin (when provided)
// maps each result transition to the index of the A-transition it came from,
// which lets program-automaton provenance survive products.

template <class L>
BuchiAutomaton<L> intersect(const BuchiAutomaton<L>& a, const BuchiAutomaton<L>& b,
                            std::vector<int>* left_origin = nullptr) {
    std::map<std::pair<int, int>, int> ids;
    std::vector<std::pair<int, int>> order;
    std::vector<std::string> names;
    auto intern = [&](int p, int q) {
        auto key = std::make_pair(p, q);
        auto it = ids.find(key);
        if (it != ids.end()) return it->second;
        std::string nm;
        if (!a.name(p).empty() || !b.name(q).empty()) nm = a.name(p) + "&" + b.name(q);
        int id = static_cast<int>(order.size());
        ids.emplace(key, id);
        order.push_back(key);
        names.push_back(std::move(nm));
        return id;
    };
    struct Raw {
        Transition<L> t;
        int a_origin;
    };
    std::vector<Raw> raw;
    intern(a.initial(), b.initial());
    for (size_t i = 0; i < order.size(); ++i) {
        auto [p, q] = order[i];
        int from = static_cast<int>(i);
        for (int ai : a.out(p)) {
            const auto& ta = a.transitions()[static_cast<size_t>(ai)];
            for (int bi : b.out(q)) {
                const auto& tb = b.transitions()[static_cast<size_t>(bi)];
                if (!(ta.label == tb.label)) continue;
                int to = intern(ta.to, tb.to);
                raw.push_back(Raw{Transition<L>{from, ta.label, to}, ai});
            }
        }
    }
    // add transitions in sorted, deduplicated order so indices equal ours
    std::stable_sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
        if (x.t == y.t) return false;
        return x.t < y.t;
    });
    raw.erase(std::unique(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.t == y.t; }),
              raw.end());
    BuchiAutomaton<L> prod;
    for (size_t i = 0; i < order.size(); ++i) prod.add_state(false, names[i]);
    prod.set_initial(0);
    for (const auto& r : raw) prod.add_transition(r.t.from, r.t.label, r.t.to);

    std::vector<std::vector<bool>> sets(2, std::vector<bool>(static_cast<size_t>(prod.num_states()), false));
    for (const auto& [key, id] : ids) {
        sets[0][static_cast<size_t>(id)] = a.is_accepting(key.first);
        sets[1][static_cast<size_t>(id)] = b.is_accepting(key.second);
    }
    std::vector<int> degen_origin;
    BuchiAutomaton<L> result = degeneralize(prod, sets, &degen_origin);
    if (left_origin) {
        left_origin->clear();
        for (int oi : degen_origin) left_origin->push_back(raw[static_cast<size_t>(oi)].a_origin);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Rank-based complementation (ranks bounded by 2|Q|, (ranking, O-set)
// states). `budget` caps generated states; exceeding it raises
// BudgetExceeded, which surfaces as a resource verdict at the top level.

namespace detail {

// When every state accepts, any infinite run accepts, so the complement is
// the set of words on which every run dies. By König's lemma that happens
// exactly when the subset construction reaches the empty set: deterministic,
// with the empty set as sink and sole accepting state.
template <class L>
BuchiAutomaton<L> complement_all_accepting(const BuchiAutomaton<L>& a, const std::vector<L>& alphabet,
                                           long long budget) {
    BuchiAutomaton<L> out;
    std::map<std::set<int>, int> ids;
    std::vector<std::set<int>> order;
    long long generated = 0;
    auto intern = [&](const std::set<int>& s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        if (++generated > budget) throw BudgetExceeded("complementation state budget exceeded", generated);
        int id = out.add_state(s.empty());
        ids.emplace(s, id);
        order.push_back(s);
        return id;
    };
    intern({a.initial()});
    out.set_initial(0);
    for (size_t i = 0; i < order.size(); ++i) {
        std::set<int> cur = order[i];
        int from = ids[cur];
        for (const L& letter : alphabet) {
            std::set<int> next;
            for (int s : cur)
                for (int ti : a.out(s)) {
                    const auto& t = a.transitions()[static_cast<size_t>(ti)];
                    if (t.label == letter) next.insert(t.to);
                }
            out.add_transition(from, letter, intern(next));
        }
    }
    return out;
}

}  // namespace detail

template <class L>
BuchiAutomaton<L> complement(const BuchiAutomaton<L>& a, const std::vector<L>& alphabet,
                             long long budget = 1000000) {
    int n = a.num_states();
    bool all_accepting = true;
    for (int s = 0; s < n; ++s)
        if (!a.is_accepting(s)) all_accepting = false;
    if (all_accepting) return detail::complement_all_accepting(a, alphabet, budget);
    int max_rank = 2 * n;
    using RankState = std::pair<std::vector<int>, std::vector<bool>>;  // ranks (-1 = absent), O
    std::map<RankState, int> ids;
    std::vector<RankState> order;
    BuchiAutomaton<L> out;
    long long generated = 0;
    auto intern = [&](const RankState& rs) {
        auto it = ids.find(rs);
        if (it != ids.end()) return it->second;
        if (++generated > budget) throw BudgetExceeded("complementation state budget exceeded", generated);
        bool acc = true;
        for (bool o : rs.second)
            if (o) acc = false;
        int id = out.add_state(acc);
        ids.emplace(rs, id);
        order.push_back(rs);
        return id;
    };
    RankState init{std::vector<int>(static_cast<size_t>(n), -1), std::vector<bool>(static_cast<size_t>(n), false)};
    init.first[static_cast<size_t>(a.initial())] = max_rank;
    out.set_initial(intern(init));

    for (size_t i = 0; i < order.size(); ++i) {
        RankState rs = order[i];
        int from = ids[rs];
        for (const L& letter : alphabet) {
            // successor set and rank upper bounds
            std::vector<int> ub(static_cast<size_t>(n), -1);
            std::vector<bool> in_succ(static_cast<size_t>(n), false);
            std::vector<bool> o_succ(static_cast<size_t>(n), false);
            for (int q = 0; q < n; ++q) {
                if (rs.first[static_cast<size_t>(q)] < 0) continue;
                for (int ti : a.out(q)) {
                    const auto& t = a.transitions()[static_cast<size_t>(ti)];
                    if (!(t.label == letter)) continue;
                    size_t to = static_cast<size_t>(t.to);
                    in_succ[to] = true;
                    int r = rs.first[static_cast<size_t>(q)];
                    ub[to] = ub[to] < 0 ? r : std::min(ub[to], r);
                    if (rs.second[static_cast<size_t>(q)]) o_succ[to] = true;
                }
            }
            std::vector<int> dom;
            for (int q = 0; q < n; ++q)
                if (in_succ[static_cast<size_t>(q)]) dom.push_back(q);
            bool o_empty = true;
            for (bool o : rs.second)
                if (o) o_empty = false;

            // enumerate all legal successor rankings
            std::vector<int> choice(dom.size(), 0);
            std::function<void(size_t, RankState&)> emit = [&](size_t di, RankState& next) {
                if (di == dom.size()) {
                    // O update
                    std::fill(next.second.begin(), next.second.end(), false);
                    for (int q : dom) {
                        bool even = next.first[static_cast<size_t>(q)] % 2 == 0;
                        if (o_empty) {
                            if (even) next.second[static_cast<size_t>(q)] = true;
                        } else {
                            if (o_succ[static_cast<size_t>(q)] && even) next.second[static_cast<size_t>(q)] = true;
                        }
                    }
                    int to = intern(next);
                    out.add_transition(from, letter, to);
                    return;
                }
                int q = dom[di];
                for (int r = 0; r <= ub[static_cast<size_t>(q)]; ++r) {
                    if (a.is_accepting(q) && r % 2 == 1) continue;
                    next.first[static_cast<size_t>(q)] = r;
                    emit(di + 1, next);
                }
                next.first[static_cast<size_t>(q)] = -1;
            };
            RankState next{std::vector<int>(static_cast<size_t>(n), -1),
                           std::vector<bool>(static_cast<size_t>(n), false)};
            emit(0, next);
        }
    }
    return out;
}

// L(a) \ L(b), with optional provenance passthrough from `a`.
template <class L>
BuchiAutomaton<L> difference(const BuchiAutomaton<L>& a, const BuchiAutomaton<L>& b, long long budget = 1000000,
                             std::vector<int>* left_origin = nullptr) {
    std::vector<L> alpha = a.alphabet();
    for (const L& l : b.alphabet()) alpha.push_back(l);
    std::sort(alpha.begin(), alpha.end());
    alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
    BuchiAutomaton<L> comp = complement(b, alpha, budget);
    return intersect(a, comp, left_origin);
}

// ---------------------------------------------------------------------------
// Simple cycle enumeration (Johnson's algorithm over vertices, walking
// transitions so parallel edges yield distinct cycles; self-loop transitions
// are emitted as 1-cycles first).

template <class L>
std::vector<std::vector<Transition<L>>> enumerate_simple_cycles(const BuchiAutomaton<L>& a,
                                                                long long max_cycles = 100000) {
    std::vector<std::vector<Transition<L>>> cycles;
    auto push_cycle = [&](std::vector<Transition<L>> c) {
        if (static_cast<long long>(cycles.size()) >= max_cycles)
            throw BudgetExceeded("cycle enumeration budget exceeded", static_cast<long long>(cycles.size()));
        cycles.push_back(std::move(c));
    };
    for (const auto& t : a.transitions())
        if (t.from == t.to) push_cycle({t});

    int n = a.num_states();
    for (int root = 0; root < n; ++root) {
        // Johnson's blocked search restricted to vertices >= root
        std::vector<bool> blocked(static_cast<size_t>(n), false);
        std::vector<std::set<int>> block_map(static_cast<size_t>(n));
        std::vector<Transition<L>> path;
        std::function<void(int)> unblock = [&](int v) {
            blocked[static_cast<size_t>(v)] = false;
            for (int w : block_map[static_cast<size_t>(v)])
                if (blocked[static_cast<size_t>(w)]) unblock(w);
            block_map[static_cast<size_t>(v)].clear();
        };
        std::function<bool(int)> circuit = [&](int v) -> bool {
            bool found = false;
            blocked[static_cast<size_t>(v)] = true;
            for (int ti : a.out(v)) {
                const auto& t = a.transitions()[static_cast<size_t>(ti)];
                if (t.to < root || t.to == t.from) continue;  // self-loops already emitted
                if (t.to == root) {
                    path.push_back(t);
                    push_cycle(path);
                    path.pop_back();
                    found = true;
                } else if (!blocked[static_cast<size_t>(t.to)]) {
                    path.push_back(t);
                    if (circuit(t.to)) found = true;
                    path.pop_back();
                }
            }
            if (found) {
                unblock(v);
            } else {
                for (int ti : a.out(v)) {
                    const auto& t = a.transitions()[static_cast<size_t>(ti)];
                    if (t.to < root || t.to == t.from) continue;
                    block_map[static_cast<size_t>(t.to)].insert(v);
                }
            }
            return found;
        };
        circuit(root);
    }
    return cycles;
}

// ---------------------------------------------------------------------------
// Relabeling with deduplication; the backbone of the universal projection.
// `f` maps a transition index to the new label.

template <class L, class F>
auto relabel_dedup(const BuchiAutomaton<L>& a, F&& f)
    -> BuchiAutomaton<std::decay_t<decltype(f(0))>> {
    using L2 = std::decay_t<decltype(f(0))>;
    BuchiAutomaton<L2> out;
    for (int s = 0; s < a.num_states(); ++s) out.add_state(a.is_accepting(s), a.name(s));
    out.set_initial(a.initial());
    std::set<Transition<L2>> seen;
    for (int i = 0; i < static_cast<int>(a.transitions().size()); ++i) {
        const auto& t = a.transitions()[static_cast<size_t>(i)];
        Transition<L2> nt{t.from, f(i), t.to};
        if (seen.insert(nt).second) out.add_transition(nt.from, nt.label, nt.to);
    }
    return out;
}

// Keep only useful states: reachable from the initial state and able to reach
// an accepting cycle. Language-preserving; shrinks complementation inputs and
// products considerably. The initial state is always kept.
template <class L>
BuchiAutomaton<L> trim_productive(const BuchiAutomaton<L>& a, std::vector<int>* tr_origin = nullptr) {
    int n = a.num_states();
    std::vector<bool> reach(static_cast<size_t>(n), false);
    reach[static_cast<size_t>(a.initial())] = true;
    std::vector<int> stack{a.initial()};
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int ti : a.out(s)) {
            int to = a.transitions()[static_cast<size_t>(ti)].to;
            if (!reach[static_cast<size_t>(to)]) {
                reach[static_cast<size_t>(to)] = true;
                stack.push_back(to);
            }
        }
    }
    std::vector<bool> good(static_cast<size_t>(n), false);
    for (int f = 0; f < n; ++f) {
        if (!a.is_accepting(f) || !reach[static_cast<size_t>(f)]) continue;
        if (detail::shortest_path(a, f, f, true)) good[static_cast<size_t>(f)] = true;
    }
    // backward reachability from the good accepting states
    std::vector<std::vector<int>> preds(static_cast<size_t>(n));
    for (const auto& t : a.transitions()) preds[static_cast<size_t>(t.to)].push_back(t.from);
    std::vector<bool> productive = good;
    for (int s = 0; s < n; ++s)
        if (good[static_cast<size_t>(s)]) stack.push_back(s);
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int p : preds[static_cast<size_t>(s)])
            if (!productive[static_cast<size_t>(p)]) {
                productive[static_cast<size_t>(p)] = true;
                stack.push_back(p);
            }
    }
    BuchiAutomaton<L> out;
    std::vector<int> map(static_cast<size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
        bool keep = reach[static_cast<size_t>(s)] && (productive[static_cast<size_t>(s)] || s == a.initial());
        if (keep) map[static_cast<size_t>(s)] = out.add_state(a.is_accepting(s), a.name(s));
    }
    out.set_initial(map[static_cast<size_t>(a.initial())]);
    if (tr_origin) tr_origin->clear();
    for (int i = 0; i < static_cast<int>(a.transitions().size()); ++i) {
        const auto& t = a.transitions()[static_cast<size_t>(i)];
        if (map[static_cast<size_t>(t.from)] < 0 || map[static_cast<size_t>(t.to)] < 0) continue;
        out.add_transition(map[static_cast<size_t>(t.from)], t.label, map[static_cast<size_t>(t.to)]);
        if (tr_origin) tr_origin->push_back(i);
    }
    return out;
}

// Restrict to states reachable from the initial state. `state_map` (old->new,
// -1 for dropped) and `tr_origin` let callers remap parallel provenance.
template <class L>
BuchiAutomaton<L> restrict_to_reachable(const BuchiAutomaton<L>& a, std::vector<int>* state_map = nullptr,
                                        std::vector<int>* tr_origin = nullptr) {
    std::vector<bool> reach(static_cast<size_t>(a.num_states()), false);
    reach[static_cast<size_t>(a.initial())] = true;
    std::vector<int> stack{a.initial()};
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int ti : a.out(s)) {
            int to = a.transitions()[static_cast<size_t>(ti)].to;
            if (!reach[static_cast<size_t>(to)]) {
                reach[static_cast<size_t>(to)] = true;
                stack.push_back(to);
            }
        }
    }
    BuchiAutomaton<L> out;
    std::vector<int> map(static_cast<size_t>(a.num_states()), -1);
    for (int s = 0; s < a.num_states(); ++s)
        if (reach[static_cast<size_t>(s)]) map[static_cast<size_t>(s)] = out.add_state(a.is_accepting(s), a.name(s));
    out.set_initial(map[static_cast<size_t>(a.initial())]);
    if (tr_origin) tr_origin->clear();
    for (int i = 0; i < static_cast<int>(a.transitions().size()); ++i) {
        const auto& t = a.transitions()[static_cast<size_t>(i)];
        if (map[static_cast<size_t>(t.from)] < 0 || map[static_cast<size_t>(t.to)] < 0) continue;
        out.add_transition(map[static_cast<size_t>(t.from)], t.label, map[static_cast<size_t>(t.to)]);
        if (tr_origin) tr_origin->push_back(i);
    }
    if (state_map) *state_map = std::move(map);
    return out;
}

// ---------------------------------------------------------------------------
// Forward-bisimulation quotient (partition refinement on (acceptance,
// outgoing signature)). Since an initial state without incoming transitions
// is visited at most once, its acceptance flag is free; trying both choices
// and keeping the smaller quotient lets a redundant initial state merge away.

template <class L>
BuchiAutomaton<L> bisim_quotient(const BuchiAutomaton<L>& a, std::vector<int>* tr_origin = nullptr) {
    std::vector<int> low_origin, high_origin;
    auto quotient = [&](bool init_acc_override, bool use_override, std::vector<int>* origin) {
        int n = a.num_states();
        std::vector<int> cls(static_cast<size_t>(n));
        for (int s = 0; s < n; ++s) {
            bool acc = a.is_accepting(s);
            if (use_override && s == a.initial()) {
                bool has_incoming = false;
                for (const auto& t : a.transitions())
                    if (t.to == s) has_incoming = true;
                if (!has_incoming) acc = init_acc_override;
            }
            cls[static_cast<size_t>(s)] = acc ? 1 : 0;
        }
        for (;;) {
            std::map<std::pair<int, std::vector<std::pair<L, int>>>, int> sig_ids;
            std::vector<int> next(static_cast<size_t>(n));
            for (int s = 0; s < n; ++s) {
                std::vector<std::pair<L, int>> sig;
                for (int ti : a.out(s)) {
                    const auto& t = a.transitions()[static_cast<size_t>(ti)];
                    sig.emplace_back(t.label, cls[static_cast<size_t>(t.to)]);
                }
                std::sort(sig.begin(), sig.end(), [](const auto& x, const auto& y) {
                    if (x.first == y.first) return x.second < y.second;
                    return x.first < y.first;
                });
                sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
                auto key = std::make_pair(cls[static_cast<size_t>(s)], std::move(sig));
                auto it = sig_ids.find(key);
                if (it == sig_ids.end()) it = sig_ids.emplace(key, static_cast<int>(sig_ids.size())).first;
                next[static_cast<size_t>(s)] = it->second;
            }
            if (next == cls) break;
            cls = std::move(next);
        }
        // renumber classes by first occurrence for stable output
        std::map<int, int> renum;
        for (int s = 0; s < n; ++s)
            if (!renum.count(cls[static_cast<size_t>(s)]))
                renum[cls[static_cast<size_t>(s)]] = static_cast<int>(renum.size());
        BuchiAutomaton<L> out;
        while (out.num_states() < static_cast<int>(renum.size())) out.add_state(false);
        // class flag: taken from a member other than the overridden initial
        // state when one exists (the override member's own flag is unobservable)
        std::vector<int> flag_source(renum.size(), -1);
        for (int s = 0; s < n; ++s) {
            int c = renum[cls[static_cast<size_t>(s)]];
            bool is_override = use_override && s == a.initial();
            if (flag_source[static_cast<size_t>(c)] < 0) {
                flag_source[static_cast<size_t>(c)] = s;
                out.set_name(c, a.name(s));
            } else if (!is_override) {
                int prev = flag_source[static_cast<size_t>(c)];
                if (use_override && prev == a.initial()) flag_source[static_cast<size_t>(c)] = s;
            }
        }
        for (size_t c = 0; c < flag_source.size(); ++c)
            out.set_accepting(static_cast<int>(c), a.is_accepting(flag_source[c]));
        out.set_initial(renum[cls[static_cast<size_t>(a.initial())]]);
        struct Raw {
            Transition<L> t;
            int origin;
        };
        std::vector<Raw> raw;
        for (int i = 0; i < static_cast<int>(a.transitions().size()); ++i) {
            const auto& t = a.transitions()[static_cast<size_t>(i)];
            raw.push_back(Raw{Transition<L>{renum[cls[static_cast<size_t>(t.from)]], t.label,
                                            renum[cls[static_cast<size_t>(t.to)]]},
                              i});
        }
        std::stable_sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
            if (x.t == y.t) return false;
            return x.t < y.t;
        });
        raw.erase(std::unique(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.t == y.t; }),
                  raw.end());
        for (const auto& r : raw) {
            out.add_transition(r.t.from, r.t.label, r.t.to);
            if (origin) origin->push_back(r.origin);
        }
        return out;
    };
    BuchiAutomaton<L> low = quotient(false, true, &low_origin);
    BuchiAutomaton<L> high = quotient(true, true, &high_origin);
    if (high.num_states() < low.num_states()) {
        if (tr_origin) *tr_origin = std::move(high_origin);
        return high;
    }
    if (tr_origin) *tr_origin = std::move(low_origin);
    return low;
}

// ---------------------------------------------------------------------------
// DOT export. Accepting states render as double circles; labels are escaped.

template <class L>
std::string to_dot(const BuchiAutomaton<L>& a, const std::string& graph_name,
                   const std::function<std::string(const L&)>& print_label) {
    auto esc = [](const std::string& s) {
        std::string r;
        for (char c : s) {
            if (c == '"' || c == '\\') r.push_back('\\');
            r.push_back(c);
        }
        return r;
    };
    std::ostringstream os;
    os << "digraph \"" << esc(graph_name) << "\" {\n";
    os << "  rankdir=LR;\n  node [shape=circle];\n";
    os << "  __init [shape=point];\n";
    for (int s = 0; s < a.num_states(); ++s) {
        std::string label = a.name(s).empty() ? "q" + std::to_string(s) : a.name(s);
        os << "  s" << s << " [label=\"" << esc(label) << "\""
           << (a.is_accepting(s) ? ", shape=doublecircle" : "") << "];\n";
    }
    os << "  __init -> s" << a.initial() << ";\n";
    for (const auto& t : a.transitions())
        os << "  s" << t.from << " -> s" << t.to << " [label=\"" << esc(print_label(t.label)) << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace hytsl
