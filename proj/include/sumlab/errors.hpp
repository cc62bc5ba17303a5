#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sumlab {

/// Input outside the domain of a closed-form or estimator.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical routine failed to converge; the message carries diagnostics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No closed-city equilibrium could be bracketed.
class NoEquilibriumError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Design matrix is rank deficient; `column()` names the first offending column.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& column, const std::string& what)
      : std::runtime_error(what), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class WeakInstrumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Line numbers are 1-based and count the header.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg),
        file_(std::move(file)),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Configuration validation failure listing every violated key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace sumlab
