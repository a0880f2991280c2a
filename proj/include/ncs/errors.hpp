#pragma once

#include <stdexcept>
#include <string>

namespace ncs {

// Error taxonomy. `code` is a stable machine-readable tag; the CLI maps codes
// to exit status: hypothesis/validation failures -> 2, numerical failures -> 3,
// config syntax errors -> 1.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

// Bad arguments, malformed inputs, spec-hypothesis violations.
class HypothesisError : public Error {
public:
  using Error::Error;
};

// Quadrature/iteration/linear-solve breakdowns.
class NumericalError : public Error {
public:
  using Error::Error;
};

// Config file syntax errors (carries a line number in the message).
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error("ParseError", "line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace ncs
