#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace mtsa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

// Raised by configuration / input validation; maps to exit code 2 in the CLI.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

class ReducibleChain : public Error {
 public:
  using Error::Error;
};

class EpisodeCap : public Error {
 public:
  using Error::Error;
};

// Errors raised while stepping a recursion. run() attaches the failing step index.
class StepError : public Error {
 public:
  using Error::Error;

  std::optional<std::uint64_t> step_index() const { return step_; }
  void set_step_index(std::uint64_t k) { step_ = k; }

 private:
  std::optional<std::uint64_t> step_;
};

class DivergenceError : public StepError {
 public:
  using StepError::StepError;
};

class DriftError : public StepError {
 public:
  using StepError::StepError;
};

}  // namespace mtsa
