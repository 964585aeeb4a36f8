#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pearsan {

/// Base class for every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t got)
      : Error(what + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(got)),
        expected_(expected),
        got_(got) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

/// Raised when a sample has (numerically) zero variance, so a correlation
/// is undefined. `which()` names the offending list ("F", "H", "X", ...).
class DegenerateVarianceError : public Error {
 public:
  DegenerateVarianceError(std::string which, const std::string& detail)
      : Error("degenerate variance in " + which + ": " + detail), which_(std::move(which)) {}

  const std::string& which() const noexcept { return which_; }

 private:
  std::string which_;
};

/// Malformed or inconsistent configuration. Line is 0 when not tied to a file.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message, std::size_t line = 0)
      : Error((line ? "line " + std::to_string(line) + ": " : std::string{}) +
              (field.empty() ? std::string{} : field + ": ") + message),
        field_(std::move(field)),
        message_(message),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::string message_;
  std::size_t line_;
};

/// Malformed serialized document (JSON / CSV).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace pearsan
