#pragma once

#include <stdexcept>
#include <string>

namespace slugsim {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    parameter_domain,
    integration_stability,
    gradient_undefined,
    nonlinearity,
    bias_state,
    passivity,
    sequence,
    config,
    io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Thrown for out-of-range physical parameters. `field` is the dotted path
/// of the offending value (e.g. "device.R").
class ParameterError : public Error {
public:
    ParameterError(std::string field, const std::string& what)
        : Error(ErrorKind::parameter_domain, field + ": " + what), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parameter_domain: return "parameter_domain";
        case ErrorKind::integration_stability: return "integration_stability";
        case ErrorKind::gradient_undefined: return "gradient_undefined";
        case ErrorKind::nonlinearity: return "nonlinearity";
        case ErrorKind::bias_state: return "bias_state";
        case ErrorKind::passivity: return "passivity";
        case ErrorKind::sequence: return "sequence";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace slugsim
