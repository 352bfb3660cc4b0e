#include "kalinv/errors.hpp"

namespace kalinv {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::FactorizationFailed: return "FactorizationFailed";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::ForwardModelFailure: return "ForwardModelFailure";
        case ErrorKind::JacobianUnavailable: return "JacobianUnavailable";
        case ErrorKind::UnstableStep: return "UnstableStep";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SingularNormalEquations: return "SingularNormalEquations";
        case ErrorKind::SolveFailure: return "SolveFailure";
        case ErrorKind::TrajectoryBlowup: return "TrajectoryBlowup";
        case ErrorKind::NonFiniteForwardValue: return "NonFiniteForwardValue";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

}  // namespace kalinv
