#pragma once

#include <stdexcept>
#include <string>

namespace weakkam {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration; `field()` names the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Invalid argument to an operation (empty cloud, coarse mesh, t <= 0, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Out-of-domain argument for a closed-form oracle.
class DomainError : public InputError {
public:
    using InputError::InputError;
};

/// Base class of numerical failures (exit code 3 in the CLI).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Non-finite Hamiltonian / Lagrangian evaluation.
class EvaluationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Adaptive integrator step-size underflow.
class IntegrationError : public NumericalError {
public:
    IntegrationError(double reached_time, const std::string& what)
        : NumericalError(what + " (reached t = " + std::to_string(reached_time) + ")"),
          reached_time_(reached_time) {}
    double reached_time() const { return reached_time_; }

private:
    double reached_time_;
};

/// Tangent frame lost rank during propagation.
class DegeneracyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// det X vanished on a window that was required to be free of conjugate points.
class ConjugatePointError : public NumericalError {
public:
    ConjugatePointError(double crossing_time, const std::string& what)
        : NumericalError(what + " (crossing at s = " + std::to_string(crossing_time) + ")"),
          crossing_time_(crossing_time) {}
    double crossing_time() const { return crossing_time_; }

private:
    double crossing_time_;
};

/// Fixed-point iteration failed (non-contraction, iteration cap).
class SolverError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Weak-KAM iterates drift linearly: the supplied critical value is wrong.
class AlphaMismatchError : public SolverError {
public:
    AlphaMismatchError(double drift_rate, const std::string& what)
        : SolverError(what + " (drift rate " + std::to_string(drift_rate) + " per unit time)"),
          drift_rate_(drift_rate) {}
    double drift_rate() const { return drift_rate_; }

private:
    double drift_rate_;
};

/// Critical-value estimation did not stabilize.
class EstimationError : public SolverError {
public:
    EstimationError(double lo, double hi, const std::string& what)
        : SolverError(what + " (last bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "])"),
          lo_(lo), hi_(hi) {}
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double lo_, hi_;
};

/// Unbounded velocity search in the a-priori compactness bound.
class UnboundedModelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Backward characteristic requested at a kink of u.
class NonDifferentiablePointError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Oracle formula evaluated at its singular point.
class SingularPointError : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace weakkam
