#include "dlayer/error.hpp"

namespace dlayer {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::OutOfRangeEndpoint: return "OutOfRangeEndpoint";
    case ErrorKind::TopologyMismatch: return "TopologyMismatch";
    case ErrorKind::LayoutMismatch: return "LayoutMismatch";
    case ErrorKind::SumMismatch: return "SumMismatch";
    case ErrorKind::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
    case ErrorKind::InconsistentSystem: return "InconsistentSystem";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::InconsistentOrUnconverged: return "InconsistentOrUnconverged";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::Io: return "IoError";
    }
    return "Unknown";
}

int exit_code(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::LayoutMismatch:
    case ErrorKind::SumMismatch:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::NonFinite:
    case ErrorKind::InvalidArgument:
        return 2;
    case ErrorKind::DisconnectedGraph:
    case ErrorKind::OutOfRangeEndpoint:
    case ErrorKind::TopologyMismatch:
        return 3;
    case ErrorKind::NonFiniteState:
        return 4;
    case ErrorKind::InconsistentSystem:
    case ErrorKind::InconsistentOrUnconverged:
        return 5;
    default:
        return 1;
    }
}

}  // namespace dlayer
