#pragma once

#include <stdexcept>
#include <string>

namespace polyrom {

/// Caller supplied data that violates a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced non-finite values or lost definiteness.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite state detected while time stepping.
class SolverBlowup : public NumericalError {
public:
    SolverBlowup(const std::string& what, double time)
        : NumericalError(what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace polyrom
