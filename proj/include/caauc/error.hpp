#pragma once

#include <cstddef>
#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace caauc {

// Error categories map onto CLI exit codes: validation 2, numerical 3, I/O 4.
enum class ErrorKind { Validation, Numerical, Io };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

/// Missing or misnamed column in an input header.
class SchemaError : public ValidationError {
 public:
  SchemaError(std::string column, const std::string& what)
      : ValidationError(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// Unparsable or out-of-domain cell. Rows are 1-based data rows (header excluded).
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : ValidationError(what), row_(row), column_(std::move(column)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

class EmptyInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Every center is concordant (all cases or all controls).
class UnusableDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateMarkerError : public ValidationError {
 public:
  DegenerateMarkerError(std::string column, const std::string& what)
      : ValidationError(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SingularDesignError : public Error {
 public:
  explicit SingularDesignError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

/// Non-finite objective or gradient; carries the point where it happened.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::vector<double> where)
      : Error(ErrorKind::Numerical, what), where_(std::move(where)) {}
  const std::vector<double>& where() const noexcept { return where_; }

 private:
  std::vector<double> where_;
};

class BootstrapFailure : public Error {
 public:
  explicit BootstrapFailure(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Io: return 4;
  }
  return 1;
}

// Warning sink. Defaults to stderr; tests and batch drivers may silence it.
namespace log {

using Sink = std::function<void(const std::string&)>;

inline Sink& sink() {
  static Sink s = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

inline void set_sink(Sink s) { sink() = std::move(s); }

inline void silence() {
  sink() = [](const std::string&) {};
}

inline void warn(const std::string& msg) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (sink()) sink()(msg);
}

}  // namespace log
}  // namespace caauc
