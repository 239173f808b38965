#pragma once

#include <stdexcept>
#include <string>

namespace ikalab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scalar or point used with the wrong ActionParams context.
class ContextError : public Error {
 public:
  using Error::Error;
};

class InvalidPointError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Bad scenario configuration or parameter set. field() names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class AuthorizationError : public Error {
 public:
  using Error::Error;
};

class NonTerminationError : public Error {
 public:
  using Error::Error;
};

// A transcript that does not replay consistently against the configuration.
class VerificationError : public Error {
 public:
  using Error::Error;
};

// The attack (or exit strategy) did not observe the interception it needed.
// step() is the attack step label, e.g. "(c)" or "exit-1".
class SequencingError : public Error {
 public:
  SequencingError(std::string step, const std::string& what)
      : Error("attack step " + step + ": " + what), step_(std::move(step)) {}

  const std::string& step() const noexcept { return step_; }

 private:
  std::string step_;
};

}  // namespace ikalab
