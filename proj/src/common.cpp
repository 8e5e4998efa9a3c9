#include "needle/common.hpp"

namespace needle {

const char* errorKindName(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::DegenerateDomain: return "degenerate-domain";
        case ErrorKind::OutOfDomain: return "out-of-domain";
        case ErrorKind::VolumeMismatch: return "volume-mismatch";
        case ErrorKind::BudgetExceeded: return "budget-exceeded";
        case ErrorKind::NonConvergence: return "non-convergence";
        case ErrorKind::DegenerateRay: return "degenerate-ray";
        case ErrorKind::DegenerateBall: return "degenerate-ball";
        case ErrorKind::NoTriples: return "no-triples";
        case ErrorKind::Overlap: return "overlap";
        case ErrorKind::Degenerate: return "degenerate";
        case ErrorKind::FlatDensity: return "flat-density";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace needle
