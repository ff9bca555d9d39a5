#pragma once

#include <stdexcept>
#include <string>

namespace simlane {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric query outside the valid domain (e.g. station past path end).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Malformed document text. Carries 1-based line and column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Semantically invalid document. `path()` names the offending field,
/// e.g. `entities[1].id`.
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class SensorError : public Error {
 public:
  using Error::Error;
};

/// Invalid topic, pattern or bus usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

class ServiceUnavailable : public Error {
 public:
  using Error::Error;
};

class ServiceError : public Error {
 public:
  using Error::Error;
};

/// A scenario action could not be applied to the current world.
class ActionError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class ExportError : public Error {
 public:
  using Error::Error;
};

/// Campaign or test-suite configuration problem detected before execution.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace simlane
