#pragma once

#include <stdexcept>
#include <string>

namespace advrand {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map families of failures onto stable exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes disagree or an operand is too small for the requested op.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Binary file has the wrong magic, a malformed header or a truncated body.
class FormatError : public Error {
 public:
  using Error::Error;
};

class PathError : public Error {
 public:
  using Error::Error;
};

// Config text could not be parsed. line() is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, std::string key = {})
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        key_(std::move(key)) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace advrand
