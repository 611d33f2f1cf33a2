#pragma once

#include <stdexcept>
#include <string>

namespace oulc {

// All library failures derive from Error so callers can catch one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidBar : Error {
    using Error::Error;
};

struct TauOutOfRange : Error {
    using Error::Error;
};

struct SegmentTooShort : Error {
    using Error::Error;
};

// Newton iteration exhausted max_iter on every start; carries the best
// iterate found so callers can decide whether to keep it.
struct NoConvergence : Error {
    double best_sigma2;
    double best_loglik;
    NoConvergence(const std::string& msg, double sigma2, double loglik)
        : Error(msg), best_sigma2(sigma2), best_loglik(loglik) {}
};

struct DegenerateSegment : Error {
    using Error::Error;
};

struct BootstrapExhausted : Error {
    using Error::Error;
};

// CSV ingestion problems carry the 1-based line number of the offending row.
struct ParseError : Error {
    long line;
    ParseError(long line_no, const std::string& msg)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct InvariantViolation : Error {
    long line;
    InvariantViolation(long line_no, const std::string& msg)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

struct TooShort : Error {
    using Error::Error;
};

}  // namespace oulc
