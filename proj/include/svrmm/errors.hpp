#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svrmm {

enum class ErrorKind { Config, Data, Divergence };

/// Base of every error thrown by the library. The kind maps onto the CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Invalid parameters, infeasible settings, unsupported options.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DimensionError : public ConfigError {
 public:
  explicit DimensionError(const std::string& what) : ConfigError("dimension mismatch: " + what) {}
};

/// Malformed or unusable data (empty sets, bad labels).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Data:
      return 3;
    case ErrorKind::Divergence:
      return 4;
  }
  return 1;
}

}  // namespace svrmm
