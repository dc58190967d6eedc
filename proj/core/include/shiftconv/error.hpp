#pragma once

#include <stdexcept>
#include <string>

namespace shiftconv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated (non-coprime input, x <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Not enough Fourier coefficients to evaluate a sum.
class CoefficientShortfall : public Error {
 public:
  CoefficientShortfall(const std::string& what, long long required, long long available)
      : Error(what + " (required m_max=" + std::to_string(required) +
              ", available m_max=" + std::to_string(available) + ")"),
        required_(required),
        available_(available) {}

  long long required() const noexcept { return required_; }
  long long available() const noexcept { return available_; }

 private:
  long long required_;
  long long available_;
};

/// A numerical procedure failed to reach its tolerance; carries what it achieved.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double achieved)
      : Error(what + " (achieved " + std::to_string(achieved) + ")"), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Malformed input file; line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Integer overflow in an exact computation.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace shiftconv
