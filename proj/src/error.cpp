#include "pfara/error.hpp"

namespace pfara {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedRow: return "MalformedRow";
        case ErrorKind::EmptyNetwork: return "EmptyNetwork";
        case ErrorKind::DanglingNode: return "DanglingNode";
        case ErrorKind::DuplicateEdge: return "DuplicateEdge";
        case ErrorKind::UnreachablePair: return "UnreachablePair";
        case ErrorKind::NoPath: return "NoPath";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::BudgetExceeded: return "BudgetExceeded";
        case ErrorKind::Infeasible: return "Infeasible";
        case ErrorKind::Timeout: return "Timeout";
        case ErrorKind::ExplosionGuard: return "ExplosionGuard";
        case ErrorKind::TickCapExceeded: return "TickCapExceeded";
        case ErrorKind::MissingCoordinates: return "MissingCoordinates";
        case ErrorKind::MismatchedScenarios: return "MismatchedScenarios";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

}  // namespace pfara
