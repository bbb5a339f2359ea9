#include "chemoband/error.hpp"

#include <sstream>

namespace chemoband {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingDerivatives: return "MissingDerivatives";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::BlowupDetected: return "BlowupDetected";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::PositivityViolation: return "PositivityViolation";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::NoBandDetected: return "NoBandDetected";
    case ErrorCode::NonPositiveTraceValue: return "NonPositiveTraceValue";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonPositiveParameter:
    case ErrorCode::RegimeMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingDerivatives:
    case ErrorCode::DegenerateBox:
    case ErrorCode::GridMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
        return ErrorCategory::Validation;
    case ErrorCode::IoError:
        return ErrorCategory::Io;
    default:
        return ErrorCategory::Numerical;
    }
}

Error::Error(ErrorCode code, const std::string& message, std::string field)
    : std::runtime_error(message), code_(code), field_(std::move(field))
{
}

Error Error::with_time(double t) const
{
    std::ostringstream os;
    os.precision(17);
    os << what() << " (at t = " << t << ")";
    Error copy(code_, os.str(), field_);
    copy.time_ = t;
    return copy;
}

namespace {

std::string quadrature_message(double achieved, double requested)
{
    std::ostringstream os;
    os << "quadrature did not converge: achieved error " << achieved
       << " exceeds requested " << requested;
    return os.str();
}

} // namespace

QuadratureNotConverged::QuadratureNotConverged(double achieved_error, double requested_error)
    : Error(ErrorCode::QuadratureNotConverged, quadrature_message(achieved_error, requested_error)),
      achieved_(achieved_error), requested_(requested_error)
{
}

} // namespace chemoband
