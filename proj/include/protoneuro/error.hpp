#pragma once

#include <stdexcept>
#include <string>

namespace protoneuro {

enum class ErrorKind {
    InvalidParameters,
    Io,
    Parse,
    Validation,
    DimensionMismatch,
    NonFinite,
    RankDeficient,
    TooFewObservations,
    InsufficientDegreesOfFreedom,
    EmptyInput,
    ZeroMean,
};

const char* to_string(ErrorKind kind);

// Exit status used by the command-line tool: 1 I/O, 2 validation, 3 numeric.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace protoneuro
