#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace linewidth {

// Argument outside the mathematical domain of a function (non-positive width,
// non-uniform grid, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller misuse: bad flag, inconsistent configuration, unknown enum name.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cholesky factorization failed even after the largest allowed jitter.
class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double jitter)
      : std::runtime_error(what), jitter_(jitter) {}

  double jitter() const noexcept { return jitter_; }

 private:
  double jitter_;
};

// Every posterior draw of the mean width was invalid.
class EstimationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public IoError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : IoError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace linewidth
