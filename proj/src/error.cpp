#include "protoneuro/error.hpp"

namespace protoneuro {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidParameters: return "invalid-parameters";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NonFinite: return "nonfinite-state";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::TooFewObservations: return "too-few-observations";
    case ErrorKind::InsufficientDegreesOfFreedom: return "insufficient-degrees-of-freedom";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::ZeroMean: return "zero-mean";
    }
    return "unknown";
}

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Io:
        return 1;
    case ErrorKind::NonFinite:
    case ErrorKind::RankDeficient:
    case ErrorKind::InsufficientDegreesOfFreedom:
    case ErrorKind::ZeroMean:
        return 3;
    default:
        return 2;
    }
}

} // namespace protoneuro
