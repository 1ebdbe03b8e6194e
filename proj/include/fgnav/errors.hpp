// Error types thrown across the library. Each maps to one failure mode of
// the public API contracts.

#pragma once

#include <stdexcept>
#include <string>

namespace fgnav {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DuplicateKey : Error {
  using Error::Error;
};
struct UnknownKey : Error {
  using Error::Error;
};
struct NonPositiveDefinite : Error {
  using Error::Error;
};
struct MissingEstimate : Error {
  using Error::Error;
};
struct NonMonotonicTime : Error {
  using Error::Error;
};
struct ExcessiveGap : Error {
  using Error::Error;
};
struct NotGaugeFixed : Error {
  using Error::Error;
};
struct LinearSolveFailure : Error {
  using Error::Error;
};
struct EmptyGraphAfterMarginalization : Error {
  using Error::Error;
};
struct InsufficientMotion : Error {
  using Error::Error;
};
struct EmptyOverlap : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// Carries the 1-based line number of the offending row.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& reason)
      : Error("parse error at line " + std::to_string(line) + ": " + reason),
        line(line) {}
  std::size_t line;
};

}  // namespace fgnav
