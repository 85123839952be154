#pragma once

#include <stdexcept>
#include <string>

namespace bcg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A guess outside the action range. `player` names the offender.
class RangeError : public Error {
 public:
  RangeError(std::string player, const std::string& what)
      : Error(what), player_(std::move(player)) {}
  const std::string& player() const noexcept { return player_; }

 private:
  std::string player_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class CompositionError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

class FixtureMissError : public Error {
 public:
  explicit FixtureMissError(std::string digest)
      : Error("no replay fixture for request digest " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

/// Raised by a reasoner that could not produce a valid move.
class InvalidMove : public Error {
 public:
  using Error::Error;
};

}  // namespace bcg
