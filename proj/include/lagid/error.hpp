#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace lagid {

// Failure categories. The CLI maps each onto its own exit code.
enum class ErrorKind {
    Argument,
    Stability,
    Singularity,
    NumericalBreakdown,
    Sensitivity,
    Divergence,
    Normalization,
    Parse,
    Schema,
    Io,
    Config,
    Mismatch, // a model applied to data or a structure it does not fit
};

[[nodiscard]] inline const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Stability: return "stability";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::NumericalBreakdown: return "numerical_breakdown";
    case ErrorKind::Sensitivity: return "sensitivity";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
    case ErrorKind::Mismatch: return "structure_mismatch";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what)
        , kind_(kind)
    {
    }

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

    // Iteration index for identification failures, source line for parse failures.
    [[nodiscard]] std::optional<long> location() const noexcept { return location_; }

    Error& at(long location)
    {
        location_ = location;
        return *this;
    }

private:
    ErrorKind kind_;
    std::optional<long> location_;
};

} // namespace lagid
