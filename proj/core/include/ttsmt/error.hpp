#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ttsmt {

/// Broad failure classes. The CLI maps these onto exit codes and prints the
/// class name so scripts can branch on it.
enum class ErrorKind {
  kValidation,  // malformed input, violated precondition, missing file
  kConfig,      // bad configuration (unknown language, unknown model, ...)
  kBackend,     // remote generation or scoring failed after retries
  kIo,          // filesystem failure while writing outputs
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ErrorKind::kValidation, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::kConfig, message) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message)
      : Error(ErrorKind::kBackend, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorKind::kIo, message) {}
};

}  // namespace ttsmt
