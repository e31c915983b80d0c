#pragma once

#include <stdexcept>
#include <string>

namespace pcb {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NotSpdError : Error {
    explicit NotSpdError(const std::string& what = "matrix is not symmetric positive definite")
        : Error(what) {}
};

struct DimensionMismatchError : Error {
    explicit DimensionMismatchError(const std::string& what = "dimension mismatch") : Error(what) {}
};

struct InfeasibleRegionError : Error {
    explicit InfeasibleRegionError(const std::string& what = "infeasible region") : Error(what) {}
};

struct EmptyCubeError : Error {
    explicit EmptyCubeError(const std::string& what = "cube has no feasible grid point") : Error(what) {}
};

// Raised by oracle invocations that do not fit the remaining period budget.
// Algorithms catch this and switch to their commit path.
struct BudgetExhaustedError : Error {
    explicit BudgetExhaustedError(const std::string& what = "period budget exhausted") : Error(what) {}
};

struct OverflowError : Error {
    explicit OverflowError(const std::string& what = "value exceeds configured cap") : Error(what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace pcb
