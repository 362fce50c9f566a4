#pragma once

#include <stdexcept>
#include <string>

namespace readward {

/// Base for every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or a violated precondition on user input (exit code 2).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Violated operation precondition (programming or input error).
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Every answer for an object came back empty, so there is nothing to reason over.
class EmptyContextError : public PreconditionError {
public:
  using PreconditionError::PreconditionError;
};

/// Any failure coming from a QA provider (exit code 3).
class ProviderError : public Error {
public:
  using Error::Error;
};

/// Fixture provider was asked something it has no recording for.
class FixtureMissError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// HTTP timeout, connection failure or non-200 response.
class TransportError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// Choice scorer found no evidence for any choice.
class AbstainError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// Non-finite loss or parameters during training (exit code 4).
class DivergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace readward
