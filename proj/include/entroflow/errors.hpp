#pragma once

#include <stdexcept>
#include <string>

namespace entroflow {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (e.g. s <= 0 where s > 0 is required).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A coefficient model is invalid (nonpositive a, inconsistent table, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature failed to reach its tolerance.
class PrecisionError : public Error {
public:
    PrecisionError(const std::string& what, double achieved)
        : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Caller violated an operation precondition (non-uniform snapshots, non-Neumann data, ...).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A theorem hypothesis required by a check or monitor does not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A time-stepping run stopped early (positivity loss, stability guard, ceiling).
class NumericalAbort : public Error {
public:
    NumericalAbort(const std::string& reason, double last_safe_time)
        : Error(reason + " (last safe time " + std::to_string(last_safe_time) + ")"),
          reason_(reason),
          last_safe_time_(last_safe_time) {}
    const std::string& reason() const noexcept { return reason_; }
    double last_safe_time() const noexcept { return last_safe_time_; }

private:
    std::string reason_;
    double last_safe_time_;
};

}  // namespace entroflow
