#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ruckep {

/// Failure category. The numeric value doubles as the CLI exit code.
enum class ErrorKind : int {
  usage = 1,
  data = 2,
  numeric = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Bad input values: out-of-range coordinates, malformed files.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Query outside a model's domain (e.g. a kick from inside the 5 m line).
class DomainError : public DataError {
 public:
  DomainError(std::string field, const std::string& what)
      : DataError(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class SchemaError : public DataError {
 public:
  SchemaError(std::string column, const std::string& what)
      : DataError(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class RowError : public DataError {
 public:
  RowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MappingError : public DataError {
 public:
  MappingError(std::string label, const std::string& what)
      : DataError(what), label_(std::move(label)) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class SingularDesignError : public Error {
 public:
  SingularDesignError(std::size_t column, std::string label)
      : Error(ErrorKind::numeric,
              "design matrix is rank deficient: column " + std::to_string(column) + " (" +
                  label + ") is linearly dependent on the preceding columns"),
        column_(column),
        label_(std::move(label)) {}
  std::size_t column() const noexcept { return column_; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::size_t column_;
  std::string label_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> last_iterate, int iterations)
      : Error(ErrorKind::numeric, what),
        last_iterate_(std::move(last_iterate)),
        iterations_(iterations) {}
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  int iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  int iterations_;
};

class SelectionError : public Error {
 public:
  explicit SelectionError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class FitDomainError : public DataError {
 public:
  explicit FitDomainError(const std::string& what) : DataError(what) {}
};

}  // namespace ruckep
