#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pfara {

enum class ErrorKind {
    MalformedRow,
    EmptyNetwork,
    DanglingNode,
    DuplicateEdge,
    UnreachablePair,
    NoPath,
    SchemaError,
    InvariantViolation,
    BudgetExceeded,
    Infeasible,
    Timeout,
    ExplosionGuard,
    TickCapExceeded,
    MissingCoordinates,
    MismatchedScenarios,
    Io,
    Usage,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace pfara
