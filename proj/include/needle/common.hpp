#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace needle {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Error categories surface in CLI error JSON as the `kind` field.
enum class ErrorKind {
    InvalidParameter,
    DegenerateDomain,
    OutOfDomain,
    VolumeMismatch,
    BudgetExceeded,
    NonConvergence,
    DegenerateRay,
    DegenerateBall,
    NoTriples,
    Overlap,
    Degenerate,
    FlatDensity,
    Parse,
    Io,
};

const char* errorKindName(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

inline void require(bool ok, ErrorKind k, const std::string& msg) {
    if (!ok) fail(k, msg);
}

// Real number or a tagged +infinity. Never produced by float overflow.
struct ExtReal {
    double value = 0.0;
    bool infinite = false;

    static ExtReal finite(double v) { return {v, false}; }
    static ExtReal inf() { return {0.0, true}; }

    bool isInf() const { return infinite; }
    // Only valid when finite; infinite maps to +inf for printing.
    double toDouble() const { return infinite ? std::numeric_limits<double>::infinity() : value; }

    friend std::partial_ordering operator<=>(const ExtReal& a, const ExtReal& b) {
        if (a.infinite && b.infinite) return std::partial_ordering::equivalent;
        if (a.infinite) return std::partial_ordering::greater;
        if (b.infinite) return std::partial_ordering::less;
        return a.value <=> b.value;
    }
    friend bool operator==(const ExtReal& a, const ExtReal& b) {
        return a.infinite == b.infinite && (a.infinite || a.value == b.value);
    }
};

}  // namespace needle
