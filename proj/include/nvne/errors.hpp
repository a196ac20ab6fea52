#pragma once

#include <stdexcept>
#include <string>

namespace nvne {

// Base of every library error. Numeric problems derive from NumericError so the
// CLI can map them onto a single exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class NotHermitian : public NumericError {
public:
    using NumericError::NumericError;
};

class NotPositive : public NumericError {
public:
    using NumericError::NumericError;
};

class ZeroTrace : public NumericError {
public:
    using NumericError::NumericError;
};

class DimensionMismatch : public NumericError {
public:
    using NumericError::NumericError;
};

class DomainError : public NumericError {
public:
    using NumericError::NumericError;
};

class NumericalFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class GradientFailure : public NumericError {
public:
    using NumericError::NumericError;
};

class SignalTooWeak : public NumericError {
public:
    using NumericError::NumericError;
};

// Parameters outside the validity window of a closed-form result.
class OutOfDomain : public NumericError {
public:
    using NumericError::NumericError;
};

class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace nvne
