#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

/// Raised when an argument violates an operation's precondition
/// (non-finite state, negative step, probability outside [0, 1], ...).
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scenario file or command option is missing, malformed, or out of range.
/// `key_path()` names the offending entry as `section.key`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class NumericalError : public std::runtime_error {
 public:
  enum class Kind {
    kUnstableLoop,
    kPoleOnAxis,
    kNoUniqueSolution,
    kUndefinedStationary,
    kInsufficientData,
    kResidual,
  };

  NumericalError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace platoon
