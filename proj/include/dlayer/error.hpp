#pragma once

#include <stdexcept>
#include <string>

namespace dlayer {

enum class ErrorKind {
    InvalidArgument,
    ShapeMismatch,
    NonFinite,
    ConvergenceFailure,
    DisconnectedGraph,
    OutOfRangeEndpoint,
    TopologyMismatch,
    LayoutMismatch,
    SumMismatch,
    NotPositiveSemidefinite,
    InconsistentSystem,
    NonFiniteState,
    InsufficientSamples,
    InconsistentOrUnconverged,
    Parse,
    MissingArtifact,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

// Process exit status used by the command line front end.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace dlayer
