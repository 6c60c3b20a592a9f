#pragma once

#include <stdexcept>
#include <string>

namespace binfwd {

// Bad inputs: malformed kernels, unknown axes, schema violations. CLI exit 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

struct AxisNotFound : ValidationError {
    explicit AxisNotFound(const std::string& axis)
        : ValidationError("axis not found: " + axis) {}
};

// A request that would exceed the memory/compute budget. CLI exit 3.
struct BudgetError : std::runtime_error {
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Every optimizer restart ended infeasible. CLI exit 4.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace binfwd
