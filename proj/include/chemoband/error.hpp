#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chemoband {

enum class ErrorCode {
    NonPositiveParameter,
    RegimeMismatch,
    InvalidArgument,
    MissingDerivatives,
    QuadratureNotConverged,
    BlowupDetected,
    StepSizeUnderflow,
    PositivityViolation,
    LinearSolveFailure,
    NoBandDetected,
    NonPositiveTraceValue,
    DegenerateBox,
    GridMismatch,
    ParseError,
    ValidationError,
    IoError,
};

/// Coarse grouping used by the command line tool to pick an exit code.
enum class ErrorCategory { Validation, Numerical, Io };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

/// Base exception for every failure raised by the library.
///
/// `field()` names the offending parameter for validation errors and is empty
/// otherwise. `time()` is filled in when a time-stepping loop propagates a
/// failure from inside a step.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {});

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }
    const std::string& field() const noexcept { return field_; }
    std::optional<double> time() const noexcept { return time_; }

    Error with_time(double t) const;

private:
    ErrorCode code_;
    std::string field_;
    std::optional<double> time_;
};

class QuadratureNotConverged : public Error {
public:
    QuadratureNotConverged(double achieved_error, double requested_error);

    double achieved_error() const noexcept { return achieved_; }
    double requested_error() const noexcept { return requested_; }

private:
    double achieved_;
    double requested_;
};

} // namespace chemoband
