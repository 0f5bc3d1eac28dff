#pragma once

#include <stdexcept>
#include <string>

namespace ksdg {

/// Invalid construction arguments (bad mesh request, out-of-range parameters).
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was applied outside the set where it is defined,
/// e.g. a jump across a boundary edge or log(u + eps) with u + eps <= 0.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A linear solve did not reach its tolerance.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

} // namespace ksdg

namespace ksdg {

/// Malformed or invalid configuration text. `line()` is 1-based; 0 when the
/// problem is not tied to a single line.
class ParseError : public std::runtime_error {
public:
  ParseError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace ksdg
