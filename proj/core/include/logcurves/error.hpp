#pragma once

#include <stdexcept>
#include <string>

namespace logcurves {

// Base class of every error raised by the library. Callers that only care
// about "the pipeline failed" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No line of any input yielded a timestamp.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

// Invalid settings, unreadable paths, inconsistent flag combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A dissimilarity matrix with negative or non-finite entries.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// R² requested for dissimilarities with zero variance but non-zero residuals.
class UndefinedFit : public Error {
 public:
  using Error::Error;
};

// A Curve Document that does not conform to the version 1 schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// HTTP or timeout failure talking to a completion endpoint, after retries.
class ProviderError : public Error {
 public:
  using Error::Error;
};

}  // namespace logcurves
