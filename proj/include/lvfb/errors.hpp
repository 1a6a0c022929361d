#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lvfb {

/// Thrown when a parameter or argument lies outside its admissible set.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base class for numerical failures.
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what, std::vector<std::string> trace = {})
        : std::runtime_error(what), trace_(std::move(trace))
    {
    }

    /// Iteration history or other diagnostics, one line per entry.
    const std::vector<std::string>& trace() const { return trace_; }

private:
    std::vector<std::string> trace_;
};

/// A relaxation or iteration hit its cap without meeting its tolerance.
class NonConverged : public SolverError {
public:
    NonConverged(const std::string& what, double s, double t, double update_rate, double probe_value)
        : SolverError(what), s_(s), t_(t), update_rate_(update_rate), probe_value_(probe_value)
    {
    }

    double speed() const { return s_; }
    double time() const { return t_; }
    double update_rate() const { return update_rate_; }
    double probe_value() const { return probe_value_; }

private:
    double s_;
    double t_;
    double update_rate_;
    double probe_value_;
};

/// A discrete invariant (front monotonicity, bounds) failed beyond rounding.
class InvariantViolation : public SolverError {
public:
    using SolverError::SolverError;
};

/// A field left its admissible band by a wide margin; retry with a smaller step.
class StabilityError : public SolverError {
public:
    using SolverError::SolverError;
};

}  // namespace lvfb
