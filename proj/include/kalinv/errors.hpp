#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kalinv {

enum class ErrorKind {
    FactorizationFailed,
    DimensionMismatch,
    ForwardModelFailure,
    JacobianUnavailable,
    UnstableStep,
    NoConvergence,
    SingularNormalEquations,
    SolveFailure,
    TrajectoryBlowup,
    NonFiniteForwardValue,
    ConfigError,
    InvalidArgument,
};

const char* to_string(ErrorKind kind);

/// Base class of every error the toolkit raises. Carries a machine-readable kind
/// so front-ends can map failures to exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class FactorizationFailed : public Error {
public:
    explicit FactorizationFailed(const std::string& what)
        : Error(ErrorKind::FactorizationFailed, "factorization failed: " + what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what)
        : Error(ErrorKind::DimensionMismatch, "dimension mismatch: " + what) {}
};

class ForwardModelFailure : public Error {
public:
    ForwardModelFailure(std::size_t point_index, const std::string& what)
        : Error(ErrorKind::ForwardModelFailure,
                "forward model failure at point " + std::to_string(point_index) + ": " + what),
          point_index_(point_index) {}
    std::size_t point_index() const noexcept { return point_index_; }

private:
    std::size_t point_index_;
};

class JacobianUnavailable : public Error {
public:
    explicit JacobianUnavailable(const std::string& what)
        : Error(ErrorKind::JacobianUnavailable, "jacobian unavailable: " + what) {}
};

class UnstableStep : public Error {
public:
    explicit UnstableStep(const std::string& what)
        : Error(ErrorKind::UnstableStep, "unstable step: " + what) {}
};

class NoConvergence : public Error {
public:
    explicit NoConvergence(const std::string& what)
        : Error(ErrorKind::NoConvergence, "no convergence: " + what) {}
};

class SingularNormalEquations : public Error {
public:
    explicit SingularNormalEquations(const std::string& what)
        : Error(ErrorKind::SingularNormalEquations, "singular normal equations: " + what) {}
};

class SolveFailure : public Error {
public:
    explicit SolveFailure(const std::string& what)
        : Error(ErrorKind::SolveFailure, "linear solve failed: " + what) {}
};

class TrajectoryBlowup : public Error {
public:
    explicit TrajectoryBlowup(const std::string& what)
        : Error(ErrorKind::TrajectoryBlowup, "trajectory blowup: " + what) {}
};

class NonFiniteForwardValue : public Error {
public:
    explicit NonFiniteForwardValue(const std::string& what)
        : Error(ErrorKind::NonFiniteForwardValue, "non-finite forward value: " + what) {}
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& reason)
        : Error(ErrorKind::ConfigError, "config error at '" + field + "': " + reason),
          field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what)
        : Error(ErrorKind::InvalidArgument, "invalid argument: " + what) {}
};

}  // namespace kalinv
