#ifndef NVSCC_ERRORS_HPP
#define NVSCC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nvscc {

/// A documented precondition of an operation was violated by the caller.
class PreconditionViolation : public std::invalid_argument {
public:
    explicit PreconditionViolation(const std::string& what)
        : std::invalid_argument(what) {}
};

/// An iterative solver failed to converge; carries the final residual.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double residual)
        : std::runtime_error(what), final_residual(residual) {}
    double final_residual;
};

/// A numerical procedure (root bracket, quadrature, peak search) could not
/// produce a result.
class ComputationFailure : public std::runtime_error {
public:
    explicit ComputationFailure(const std::string& what)
        : std::runtime_error(what) {}
};

/// Configuration file failed to parse or validate; names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& reason)
        : std::runtime_error("config field '" + field + "': " + reason),
          field_name(field) {}
    std::string field_name;
};

/// A pipeline stage was requested before its upstream artifacts exist.
class DependencyError : public std::runtime_error {
public:
    explicit DependencyError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace nvscc

#endif
