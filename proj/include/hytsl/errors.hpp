#pragma once

#include <stdexcept>
#include <string>

namespace hytsl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by the parsers; carries a 1-based line/column position.
struct ParseError : Error {
    int line;
    int column;
    ParseError(std::string msg, int line_, int column_)
        : Error("parse error at " + std::to_string(line_) + ":" + std::to_string(column_) + ": " + std::move(msg)),
          line(line_), column(column_) {}
};

struct NonPrenexError : Error {
    using Error::Error;
};

struct UnboundVariable : Error {
    using Error::Error;
};

struct SortMismatch : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

// A solver subprocess crashed, timed out, or produced garbage. Callers map
// this to the conservative side of whatever they were deciding.
struct SolverError : Error {
    using Error::Error;
};

struct BudgetExceeded : Error {
    long long generated;
    explicit BudgetExceeded(std::string msg, long long generated_ = 0)
        : Error(std::move(msg)), generated(generated_) {}
};

struct MissingProvenance : Error {
    using Error::Error;
};

}  // namespace hytsl
