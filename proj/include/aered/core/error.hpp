#pragma once

#include <stdexcept>
#include <string>

namespace aered {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible matrix or grid shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition (range, finiteness, etc).
class ValueError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the offending line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

/// Invalid configuration; `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace aered
