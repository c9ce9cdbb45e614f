#pragma once

#include <cstdint>
#include <string>

#include "hytsl/errors.hpp"

namespace hytsl {

// Total truth assignment over an atom set of fixed size; atom i is true iff
// bit i is set. Realizes a transition label l as the set of true atoms with
// every other atom explicitly false.
struct Valuation {
    uint64_t bits = 0;
    int size = 0;

    static Valuation empty(int n) {
        if (n < 0 || n > 62) throw Error("atom set too large for a valuation word");
        return Valuation{0, n};
    }

    bool test(int i) const { return (bits >> i) & 1; }
    Valuation with(int i, bool v) const {
        Valuation r = *this;
        if (v)
            r.bits |= (uint64_t{1} << i);
        else
            r.bits &= ~(uint64_t{1} << i);
        return r;
    }

    friend bool operator==(const Valuation& a, const Valuation& b) {
        return a.bits == b.bits && a.size == b.size;
    }
    friend bool operator<(const Valuation& a, const Valuation& b) {
        if (a.size != b.size) return a.size < b.size;
        return a.bits < b.bits;
    }

    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (int i = 0; i < size; ++i) {
            if (!test(i)) continue;
            if (!first) s += ",";
            first = false;
            s += "a" + std::to_string(i);
        }
        return s + "}";
    }
};

}  // namespace hytsl
