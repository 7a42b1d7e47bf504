#pragma once

#include <stdexcept>
#include <string>

namespace shelterflow {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { config = 1, input = 2, invariant = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

  const char* kind_name() const noexcept {
    switch (kind_) {
      case ErrorKind::config: return "config";
      case ErrorKind::input: return "input";
      case ErrorKind::invariant: return "invariant";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct InputError : Error {
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct InvariantError : Error {
  explicit InvariantError(const std::string& what) : Error(ErrorKind::invariant, what) {}
};

}  // namespace shelterflow
