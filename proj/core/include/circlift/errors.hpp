#pragma once

#include <stdexcept>
#include <string>

namespace circlift {

// Bad input: out-of-domain parameters, malformed configs, rejected preconditions.
// CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A step/sample budget was exhausted before the measurement finished.
// CLI exit code 3. Partial results, when available, travel with the report
// types rather than the exception.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A hypothesis check (assumptions, no-backtracking) failed with a witness.
// CLI exit code 4.
class HypothesisError : public std::runtime_error {
public:
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// The tangency-order fit did not converge cleanly: data neither confirms nor
// refutes an even-order tangency. Distinct from a clean assumption failure.
class InconclusiveOrderError : public std::runtime_error {
public:
    explicit InconclusiveOrderError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace circlift
