#pragma once

#include <stdexcept>
#include <string>

namespace cpl {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input or configuration. Halts the run.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Retryable I/O failure talking to a model endpoint or verifier process.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Non-retryable failure (bad credentials, exhausted replay fixtures, ...).
class FatalError : public Error {
 public:
  using Error::Error;
};

/// A replay fixture queue has no response left for the requested call.
class FixtureExhausted : public FatalError {
 public:
  using FatalError::FatalError;
};

/// Value violates a domain-type invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Rendering cannot fit the mandatory parts of a context in the budget.
class ContextError : public Error {
 public:
  using Error::Error;
};

/// A persisted run (library file / event log) is inconsistent.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace cpl
